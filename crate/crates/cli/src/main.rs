//! `multinoise`: batch studies of multipole noise coefficients,
//! representations and weak-coupling expansions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Format;

#[derive(Parser)]
#[command(name = "multinoise", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
pub struct CommonArgs {
    /// Study configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the configured one.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Table format; overrides the configured one.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized draws; overrides the configured one.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Proceed even when the stationary-point support check fails.
    #[arg(long)]
    pub force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Weak-coupling coefficient table with the energy-shell cross-check.
    Gamma(CommonArgs),
    /// Representation property suites.
    RepCheck(CommonArgs),
    /// Two-point kernel expansion errors and rate fits.
    KernelCheck(CommonArgs),
    /// Multi-point correlation expansion errors and rate fits.
    CorrCheck(CommonArgs),
}

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Support(String),
    Oracle(String),
    Invariant(String),
    Rate(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Config(_) => 2,
            Failure::Support(_) => 3,
            Failure::Oracle(_) => 4,
            Failure::Invariant(_) => 5,
            Failure::Rate(_) => 6,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m)
            | Failure::Support(m)
            | Failure::Oracle(m)
            | Failure::Invariant(m)
            | Failure::Rate(m)
            | Failure::Other(m) => m,
        }
    }
}

impl From<multinoise_core::Error> for Failure {
    fn from(e: multinoise_core::Error) -> Self {
        use multinoise_core::Error as E;
        match e {
            E::ImaginaryResidue { .. } => Failure::Oracle(e.to_string()),
            E::InvalidArgument(_) | E::InsufficientPoints(_) | E::WordTooLong { .. } | E::MixedChannels => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("MULTINOISE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Config(format!("MULTINOISE_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Other(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Gamma(a) => commands::gamma(a),
        Command::RepCheck(a) => commands::rep_check(a),
        Command::KernelCheck(a) => commands::kernel_check(a),
        Command::CorrCheck(a) => commands::corr_check(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("multinoise: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
