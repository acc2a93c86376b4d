use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use warpcheck::models::MODEL_KINDS;
use warpcheck::report::{Report, EXIT_CONFIG};
use warpcheck::scenario::{parse_scenario, run_scenario, CheckKind, Mode, Scenario};
use warpcheck::Error;

#[derive(Parser)]
#[command(name = "warpcheck", version, about = "Verify Einstein warped products on sampled chart points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check listed in a scenario file.
    Run {
        scenario: PathBuf,
        /// Also write the JSON report to this path.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Override a check tolerance, e.g. `--tolerance einstein=1e-9`.
        #[arg(long = "tolerance", value_name = "KEY=VAL")]
        tolerances: Vec<String>,
    },
    /// List the model kinds usable in scenario files.
    ListModels,
    /// Evaluate only the corollary parameter predicates (no curvature).
    CheckParams {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn apply_overrides(
    s: &mut Scenario,
    seed: Option<u64>,
    samples: Option<usize>,
    tolerances: &[String],
) -> Result<(), Error> {
    if let Some(seed) = seed {
        s.sampling.seed = Some(seed);
    }
    if let Some(n) = samples {
        s.sampling.count = n;
    }
    for t in tolerances {
        let (key, val) = t
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("--tolerance expects KEY=VAL, got `{t}`")))?;
        let kind = CheckKind::from_name(key.trim())
            .ok_or_else(|| Error::Usage(format!("unknown check `{key}` in --tolerance")))?;
        let v: f64 = val
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("bad tolerance value `{val}`")))?;
        s.tolerances.insert(kind, v);
    }
    s.validate()
}

fn emit(report: &Report, format: Format) {
    match format {
        Format::Json => println!("{}", report.to_json()),
        Format::Text => print!("{}", report.to_text()),
    }
}

fn config_error(e: &Error) -> ExitCode {
    eprintln!("warpcheck: {e}");
    ExitCode::from(EXIT_CONFIG as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListModels => {
            for (kind, about) in MODEL_KINDS {
                println!("{kind:<12} {about}");
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            scenario,
            report,
            format,
            seed,
            samples,
            tolerances,
        } => {
            let mut s = match parse_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => return config_error(&e),
            };
            if let Err(e) = apply_overrides(&mut s, seed, samples, &tolerances) {
                return config_error(&e);
            }
            let r = match run_scenario(&s, Mode::Full) {
                Ok(r) => r,
                Err(e) => return config_error(&e),
            };
            if let Some(path) = report {
                if let Err(e) = std::fs::write(&path, r.to_json()) {
                    eprintln!("warpcheck: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_CONFIG as u8);
                }
            }
            emit(&r, format);
            ExitCode::from(r.exit_code() as u8)
        }
        Command::CheckParams { scenario, format } => {
            let s = match parse_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => return config_error(&e),
            };
            match run_scenario(&s, Mode::ParamsOnly) {
                Ok(r) => {
                    emit(&r, format);
                    ExitCode::from(r.exit_code() as u8)
                }
                Err(e) => config_error(&e),
            }
        }
    }
}
