//! Report records and their JSON/text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scenario::Scenario;

pub const REPORT_SCHEMA: &str = "warpcheck-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckError {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for CheckError {
    fn from(e: &Error) -> Self {
        CheckError {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Absent when the check could not produce a finite residual.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<CheckError>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl CheckResult {
    pub fn measured(name: &str, residual: f64, tolerance: f64) -> Self {
        let finite = residual.is_finite();
        CheckResult {
            name: name.to_string(),
            residual: finite.then_some(residual),
            tolerance,
            pass: finite && residual <= tolerance,
            error: None,
            details: BTreeMap::new(),
        }
    }

    pub fn failed(name: &str, tolerance: f64, error: CheckError) -> Self {
        CheckResult {
            name: name.to_string(),
            residual: None,
            tolerance,
            pass: false,
            error: Some(error),
            details: BTreeMap::new(),
        }
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        if value.is_finite() {
            self.details.insert(key.to_string(), value);
        }
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub lambda: Option<f64>,
    pub lambda_b: f64,
    pub lambda_f: f64,
    pub rho: f64,
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
    pub checks_ms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub scenario: Scenario,
    pub derived_constants: DerivedConstants,
    pub checks: Vec<CheckResult>,
    pub timings: Timings,
}

/// Exit status: every check passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status: at least one check failed its tolerance.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Exit status: configuration or parse error.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status: a check hit a numeric error.
pub const EXIT_NUMERIC: i32 = 3;

/// Shortest form for ordinary magnitudes, scientific otherwise.
fn constant(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            return EXIT_PASS;
        }
        let numeric = self.checks.iter().any(|c| {
            c.error.as_ref().is_some_and(|e| {
                matches!(
                    e.kind.as_str(),
                    "ArityError" | "SingularityError" | "DomainError" | "DomainViolation"
                )
            })
        });
        if numeric {
            EXIT_NUMERIC
        } else {
            EXIT_CHECK_FAILED
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.scenario.name);
        let _ = writeln!(
            out,
            "{:<12} {:>12} {:>12}  {}",
            "check", "residual", "tolerance", "status"
        );
        for c in &self.checks {
            let residual = c
                .residual
                .map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"));
            let status = if c.pass { "PASS" } else { "FAIL" };
            let _ = write!(
                out,
                "{:<12} {:>12} {:>12.3e}  {}",
                c.name, residual, c.tolerance, status
            );
            if let Some(e) = &c.error {
                let _ = write!(out, "  [{}] {}", e.kind, e.message);
            }
            out.push('\n');
        }
        let d = &self.derived_constants;
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), constant);
        let _ = writeln!(out, "derived constants:");
        let _ = writeln!(out, "  lambda = {}", opt(d.lambda));
        let _ = writeln!(out, "  lambda_B = {}", constant(d.lambda_b));
        let _ = writeln!(out, "  lambda_F = {}", constant(d.lambda_f));
        let _ = writeln!(out, "  rho = {}", constant(d.rho));
        let _ = writeln!(out, "  c = {}", opt(d.c));
        out
    }
}
