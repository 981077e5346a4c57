mod check;
mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use config::{CommonArgs, ConfigError, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Graph(#[from] mutacp::graph::GraphError),
    #[error(transparent)]
    Dynamics(#[from] mutacp::dynamics::DynamicsError),
    #[error(transparent)]
    Analysis(#[from] mutacp::analysis::AnalysisError),
    #[error(transparent)]
    MonteCarlo(#[from] mutacp::montecarlo::MonteCarloError),
    #[error(transparent)]
    Exact(#[from] mutacp::exact::ExactError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "mutacp", version, about = "Contact process with mutations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical values and windows for branching number d.
    Thresholds(CommonArgs),
    /// One run; writes the event log.
    Simulate(CommonArgs),
    /// Survival proxy over a lambda x r grid, as CSV or JSON.
    Sweep(CommonArgs),
    /// Coupled mutation / restricted runs with containment checks.
    Couple(CommonArgs),
    /// Exact transient probabilities on a small finite graph.
    Exact {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the lumped generator as `row col rate` triplets.
        #[arg(long)]
        generator: Option<PathBuf>,
    },
    /// Oracle and invariant suites.
    Check {
        #[arg(value_enum)]
        suite: check::Suite,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn setup(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let cfg = RunConfig::resolve(common)?;
    if let Some(n) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Thresholds(c) => commands::thresholds(&setup(&c)?),
        Command::Simulate(c) => commands::simulate_cmd(&setup(&c)?),
        Command::Sweep(c) => commands::sweep_cmd(&setup(&c)?),
        Command::Couple(c) => commands::couple_cmd(&setup(&c)?),
        Command::Exact { common, generator } => {
            commands::exact_cmd(&setup(&common)?, generator.as_deref())
        }
        Command::Check { suite, common } => check::run(&setup(&common)?, suite),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
