use thiserror::Error;

/// Errors raised by the numeric kernels and the scenario front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("singular: {0}")]
    Singularity(String),

    #[error("outside domain: {0}")]
    Domain(String),

    /// A warped-product spec evaluated where the warping function is not positive.
    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid field `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl Error {
    /// Short machine-readable tag, used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Arity(_) => "ArityError",
            Error::Singularity(_) => "SingularityError",
            Error::Domain(_) => "DomainError",
            Error::DomainViolation(_) => "DomainViolation",
            Error::Usage(_) => "UsageError",
            Error::Parse { .. } => "ParseError",
            Error::Validation { .. } => "ValidationError",
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
