//! Command-line front end: pipeline orchestration and report emission.
//!
//! Exit codes: 0 success, 1 constraint/verification failure, 2 input parse
//! error, 3 budget exceeded.

mod input;
mod reports;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use sadic::word::SadicSystem;
use sadic::Error;
use std::path::PathBuf;
use std::process::ExitCode;

const SCHEMA_VERSION: &str = "sadic-report/1";

#[derive(Parser)]
#[command(name = "sadic", about = "Substitutive subshift analysis", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Parameter file (system JSON, or target JSON for `realize`).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Builtin example id (1.2, 1.3, 1.4).
    #[arg(long, global = true)]
    example: Option<String>,

    /// Tower depth K.
    #[arg(long, global = true, default_value_t = 20)]
    depth: usize,

    /// Brute-force cutoff for language sampling.
    #[arg(long, global = true, default_value_t = 120)]
    qmax: usize,

    /// Working precision in bits for enclosure depth heuristics.
    #[arg(long, global = true, default_value_t = 128)]
    precision: usize,

    /// Byte budget for materialized words (env SADIC_BUDGET_BYTES overrides).
    #[arg(long, global = true)]
    budget_bytes: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Emit tower words and a generated prefix.
    Gen,
    /// Brute-force p(q) table with the closed-form increment cross-check.
    Complexity,
    /// Derived sequences, parameter constraints, and decay certification.
    Structure,
    /// Eigenvalue-group descriptor.
    Spectrum,
    /// Maximal-equicontinuous-factor descriptor.
    Mef,
    /// Balance series and empirical balance.
    Balance,
    /// Dimension-group descriptor and comparisons against the builtins.
    Dimension,
    /// Construct a system from a target specification.
    Realize {
        /// Number of substitution stages to emit.
        #[arg(long, default_value_t = 10)]
        stages: usize,
        /// Verification tolerance for the limsup check.
        #[arg(long, default_value = "1/20")]
        tol: String,
    },
    /// Golden assertions for the builtin examples.
    VerifyExamples,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Parse(_) => 2u8,
                CliError::Budget(_) => 3u8,
                CliError::Failure(_) => 1u8,
            })
        }
    }
}

enum CliError {
    Parse(String),
    Budget(String),
    Failure(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(s) | CliError::Budget(s) | CliError::Failure(s) => write!(f, "{s}"),
        }
    }
}

fn lift(e: Error) -> CliError {
    match e {
        Error::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
        Error::InvalidTau { .. } | Error::InvalidInput(_) | Error::InvalidTarget(_) => {
            CliError::Parse(e.to_string())
        }
        other => CliError::Failure(other.to_string()),
    }
}

fn budget(cli: &Cli) -> usize {
    if let Ok(v) = std::env::var("SADIC_BUDGET_BYTES") {
        if let Ok(n) = v.parse() {
            return n;
        }
    }
    cli.budget_bytes.unwrap_or(1 << 26)
}

fn load_system(cli: &Cli) -> Result<SadicSystem, CliError> {
    if let Some(example) = &cli.example {
        return sadic::fixtures::by_name(example)
            .ok_or_else(|| CliError::Parse(format!("unknown example {example:?}")));
    }
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| CliError::Parse("need --input or --example".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    input::parse_system(&text).map_err(CliError::Parse)
}

fn emit(cli: &Cli, body: String) -> Result<ExitCode, CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Failure(format!("cannot write output: {e}")))?,
        None => println!("{body}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Gen => {
            let sys = load_system(cli)?;
            let body = reports::gen_report(&sys, cli.depth, cli.qmax, budget(cli), SCHEMA_VERSION)
                .map_err(lift)?;
            emit(cli, body)
        }
        Command::Complexity => {
            let sys = load_system(cli)?;
            let out = match cli.format {
                Format::Csv => {
                    reports::complexity_csv(&sys, cli.qmax, budget(cli)).map_err(lift)?
                }
                Format::Json => {
                    reports::complexity_json(&sys, cli.qmax, budget(cli), SCHEMA_VERSION)
                        .map_err(lift)?
                }
            };
            emit(cli, out)
        }
        Command::Structure => {
            let sys = load_system(cli)?;
            let (body, pass) =
                reports::structure_report(&sys, cli.depth, cli.qmax, budget(cli), SCHEMA_VERSION)
                    .map_err(lift)?;
            let code = emit(cli, body)?;
            if pass {
                Ok(code)
            } else {
                Err(CliError::Failure("constraint violations found".into()))
            }
        }
        Command::Spectrum => {
            let sys = load_system(cli)?;
            let body =
                reports::spectrum_report(&sys, cli.depth, SCHEMA_VERSION).map_err(lift)?;
            emit(cli, body)
        }
        Command::Mef => {
            let sys = load_system(cli)?;
            let body = reports::mef_report(&sys, cli.depth, SCHEMA_VERSION).map_err(lift)?;
            emit(cli, body)
        }
        Command::Balance => {
            let sys = load_system(cli)?;
            let body = reports::balance_report(&sys, cli.depth, cli.qmax, budget(cli), SCHEMA_VERSION)
                .map_err(lift)?;
            emit(cli, body)
        }
        Command::Dimension => {
            let sys = load_system(cli)?;
            let body =
                reports::dimension_report(&sys, cli.depth, SCHEMA_VERSION).map_err(lift)?;
            emit(cli, body)
        }
        Command::Realize { stages, tol } => {
            let path = cli
                .input
                .as_ref()
                .ok_or_else(|| CliError::Parse("realize needs --input".into()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
            let target = input::parse_target(&text).map_err(CliError::Parse)?;
            let tol: BigRational = sadic::rat::rational_from_str(tol)
                .ok_or_else(|| CliError::Parse(format!("bad tolerance {tol:?}")))?;
            let (body, pass) =
                reports::realize_report(&target, *stages, cli.depth, &tol, SCHEMA_VERSION)
                    .map_err(lift)?;
            let code = emit(cli, body)?;
            if pass {
                Ok(code)
            } else {
                Err(CliError::Failure("realization verification failed".into()))
            }
        }
        Command::VerifyExamples => {
            let which = cli.example.clone();
            let (lines, pass) =
                reports::verify_examples(which.as_deref(), cli.depth, budget(cli)).map_err(lift)?;
            let code = emit(cli, lines)?;
            if pass {
                Ok(code)
            } else {
                Err(CliError::Failure("golden assertions failed".into()))
            }
        }
    }
}
