//! Command-line front end: problem files, runs, scheme comparisons,
//! property checks and the built-in worked example.
//!
//! Exit codes: 0 success, 1 usage/parse/configuration error, 2 divergence
//! guard or non-finite iterate, 3 property check failed.

pub mod commands;
pub mod output;
pub mod problem;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{CheckArgs, Overrides, Variant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Environment variable that overrides the default sampling seed.
pub const SEED_ENV: &str = "SPLITFIX_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {error}")]
    Problem {
        path: String,
        error: problem::ProblemError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] splitfix::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "splitfix",
    version,
    about = "Inertial modified S-iteration for split monotone inclusion problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct StopFlags {
    /// Maximum number of iterations.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Stop when ‖xₙ₊₁ − xₙ‖ falls to this value.
    #[arg(long)]
    step_tol: Option<f64>,
    /// Stop when both residuals fall to this value.
    #[arg(long)]
    residual_tol: Option<f64>,
    /// Divergence guard on ‖xₙ‖ and ‖S(wₙ) − wₙ‖.
    #[arg(long)]
    guard: Option<f64>,
    /// Seed for the sampling checks.
    #[arg(long)]
    seed: Option<u64>,
}

impl StopFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            max_iter: self.max_iter,
            step_tol: self.step_tol,
            residual_tol: self.residual_tol,
            guard: self.guard,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    #[value(name = "x0_pos")]
    X0Pos,
    #[value(name = "x0_neg")]
    X0Neg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetName {
    #[value(name = "paper-example")]
    PaperExample,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the scheme configured in a problem file.
    Run {
        file: PathBuf,
        #[arg(long, default_value = "splitfix-out")]
        output: PathBuf,
        #[command(flatten)]
        stop: StopFlags,
    },
    /// Run several schemes on the same problem and compare their rates.
    Compare {
        file: PathBuf,
        /// Comma-separated scheme names.
        #[arg(long)]
        schemes: String,
        #[arg(long, default_value = "splitfix-compare")]
        output: PathBuf,
        #[command(flatten)]
        stop: StopFlags,
    },
    /// Sample an operator property and print the report as JSON.
    Check {
        file: PathBuf,
        /// nonexpansive, monotone, strongly_monotone, ism, firmly_nonexpansive or adjoint.
        #[arg(long)]
        property: String,
        /// Operator name from [operators], or S, U, V, J', A.
        #[arg(long, default_value = "S")]
        operator: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of sampled pairs.
        #[arg(long, default_value_t = splitfix::analysis::DEFAULT_SAMPLES)]
        n: usize,
        /// Strong monotonicity modulus.
        #[arg(long)]
        alpha: Option<f64>,
        /// Inverse strong monotonicity modulus.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Materialize and run a built-in problem.
    Preset {
        name: PresetName,
        #[arg(long, value_enum, default_value = "x0_pos")]
        variant: VariantArg,
        #[arg(long, default_value = "splitfix-preset")]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Explicit flag, then the environment variable, then the default.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(text) => text.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "{SEED_ENV} must be an unsigned integer, got `{text}`"
            ))
        }),
        None => Ok(splitfix::analysis::DEFAULT_SEED),
    }
}

fn seed(flag: Option<u64>) -> Result<u64, CliError> {
    let env = std::env::var(SEED_ENV).ok();
    resolve_seed(flag, env.as_deref())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { file, output, stop } => {
            commands::cmd_run(&file, &output, stop.overrides(), seed(stop.seed)?)
        }
        Command::Compare {
            file,
            schemes,
            output,
            stop,
        } => commands::cmd_compare(&file, &schemes, &output, stop.overrides(), seed(stop.seed)?),
        Command::Check {
            file,
            property,
            operator,
            seed: s,
            n,
            alpha,
            beta,
        } => commands::cmd_check(
            &file,
            &property,
            &operator,
            CheckArgs {
                seed: seed(s)?,
                n,
                alpha,
                beta,
            },
        ),
        Command::Preset {
            name: PresetName::PaperExample,
            variant,
            output,
            seed: s,
        } => {
            let variant = match variant {
                VariantArg::X0Pos => Variant::X0Pos,
                VariantArg::X0Neg => Variant::X0Neg,
            };
            commands::cmd_preset(variant, &output, seed(s)?)
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_ERROR,
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(7), Some("9")).unwrap(), 7);
        assert_eq!(resolve_seed(None, Some("9")).unwrap(), 9);
        assert_eq!(
            resolve_seed(None, None).unwrap(),
            splitfix::analysis::DEFAULT_SEED
        );
        assert!(resolve_seed(None, Some("abc")).is_err());
    }

    #[test]
    fn help_exits_zero_and_bad_flags_exit_one() {
        assert_eq!(run_cli(["splitfix", "--help"]), EXIT_OK);
        assert_eq!(run_cli(["splitfix", "run"]), EXIT_ERROR);
        assert_eq!(run_cli(["splitfix", "frobnicate"]), EXIT_ERROR);
    }
}
