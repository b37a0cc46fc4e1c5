//! `chemosteady`: steady states of the chemotaxis–consumption system with
//! Robin signal boundary conditions.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 configuration
//! error, 3 solver or output failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod convergence;
mod failure;
mod output;
mod propsuite;
mod solve;

#[derive(Parser)]
#[command(name = "chemosteady", version, about = "Steady states of a chemotaxis-consumption system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write fields and a summary.
    Solve(Common),
    /// Repeat the solve on successively halved grids.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Run the property battery over the configured parameter lattice.
    Propsuite(Common),
}

#[derive(Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(common) => solve::run(common),
        Command::Convergence { common, levels } => convergence::run(common, *levels),
        Command::Propsuite(common) => propsuite::run(common),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}
