//! `adg`: forward solves, discrete gradients, verification, and convergence
//! studies for 1D discontinuous Galerkin models.

mod commands;
mod config;

use adg_core::error::SolverError;
use adg_core::problem::Direction;
use clap::{Parser, Subcommand};
use commands::{CommandError, VerifyWhich};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "adg", version, about = "1D dG lab with discretely exact adjoints and gradients")]
struct Cli {
    /// Run configuration (`key = value` lines); defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the forward problem and write solution snapshots.
    Forward,
    /// Compute the discrete gradient and directional derivatives.
    Gradient {
        /// Direction preset; overrides `gradient.direction`.
        #[arg(long)]
        direction: Option<Direction>,
    },
    /// Run verification checks; exits 4 if any check fails.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        which: VerifyWhich,
        /// Direction preset for the FD check; overrides `gradient.direction`.
        #[arg(long)]
        direction: Option<Direction>,
    },
    /// Convergence study of state and adjoint errors under h-refinement.
    Convergence {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        orders: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        levels: Vec<usize>,
    },
}

fn run(cli: &Cli) -> Result<(), CommandError> {
    let cfg = config::load(cli.config.as_deref())?;
    log::debug!("resolved configuration: {:?}", cfg.resolved);
    match &cli.command {
        Command::Forward => commands::forward(&cfg).map(|_| ()),
        Command::Gradient { direction } => commands::gradient(&cfg, direction.unwrap_or(cfg.direction)),
        Command::Verify { which, direction } => commands::verify(&cfg, *which, direction.unwrap_or(cfg.direction)),
        Command::Convergence { orders, levels } => commands::convergence(&cfg, orders, levels),
    }
}

fn exit_code(err: &CommandError) -> u8 {
    match err {
        CommandError::Config(_) | CommandError::Core(adg_core::Error::Model(_)) => 2,
        CommandError::Core(adg_core::Error::Solver(SolverError::NonFinite { .. })) => 3,
        CommandError::ChecksFailed { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CommandError::Config(e) => eprintln!("error: invalid configuration: {e}"),
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
