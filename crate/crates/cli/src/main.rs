//! `rnstab`: experiment runner for stability checks in random normed spaces.
//!
//! Exit codes: 0 clean, 1 violation, 2 usage or configuration error,
//! 3 overflow-guard truncation, 4 hypothesis failure.

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rnstab::hyers::HyersError;

use crate::config::{ExperimentConfig, KeyFlags};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("report error: {0}")]
    Report(String),
    #[error(transparent)]
    Hyers(#[from] HyersError),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Findings of a completed run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Outcome {
    pub violation: bool,
    pub truncated: bool,
    pub hypothesis_failed: bool,
}

impl Outcome {
    /// Hypothesis failure outranks truncation, which outranks violations.
    pub fn code(self) -> u8 {
        if self.hypothesis_failed {
            4
        } else if self.truncated {
            3
        } else if self.violation {
            1
        } else {
            0
        }
    }
}

#[derive(Parser)]
#[command(
    name = "rnstab",
    version,
    about = "Stability experiments for the mixed quadratic-quartic equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep equation residuals of seeded solutions over the grid.
    CheckSolution(RunArgs),
    /// Recover the quadratic and quartic parts by the direct method.
    Recover(RunArgs),
    /// Check the stability bounds cell by cell.
    VerifyBounds(RunArgs),
    /// Fuzz the random normed space axioms.
    Axioms(RunArgs),
    /// Fold Łukasiewicz tails and test defect summability.
    TnormTail(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cross-check eligible cases in exact rational arithmetic.
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    keys: KeyFlags,
}

type Runner = fn(&ExperimentConfig) -> Result<Outcome, CliError>;

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let (args, cmd): (&RunArgs, Runner) = match &cli.command {
        Command::CheckSolution(a) => (a, commands::check_solution),
        Command::Recover(a) => (a, commands::recover),
        Command::VerifyBounds(a) => (a, commands::verify_bounds),
        Command::Axioms(a) => (a, commands::axioms),
        Command::TnormTail(a) => (a, commands::tnorm_tail),
    };
    let cfg = ExperimentConfig::load(args.config.as_deref(), &args.keys, args.oracle)?;
    cmd(&cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
