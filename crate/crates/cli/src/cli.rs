use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{optimize_threshold_cmd, simulate_cmd, solve_markov_cmd, PolicyChoice};
use crate::config::{validate_config, ExperimentConfig, ExperimentName};
use crate::error::{CliError, Result};
use crate::experiments::run_and_write;
use crate::output::Format;

/// Save-then-transmit policies for an energy-harvesting uplink.
#[derive(Debug, Parser)]
#[command(name = "savetx", version)]
pub struct Cli {
    /// TOML config; every key is optional.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproduce one experiment table: fig3, fig4, fig6, fig7, fig8 or custom.
    Experiment { name: String },
    /// Optimal state-dependent rule over the securing-probability grid.
    SolveMarkov,
    /// Best rate threshold over the securing-probability grid.
    OptimizeThreshold,
    /// Simulate one policy.
    Simulate {
        /// dp, threshold:<gamma>, best-effort or conventional.
        #[arg(long, default_value = "dp")]
        policy: PolicyChoice,
        /// Also write a per-period trace for each securing probability.
        #[arg(long)]
        trace: bool,
    },
}

fn load(cli: &Cli, experiment: Option<ExperimentName>) -> Result<ExperimentConfig> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        None => String::new(),
    };
    let mut cfg = validate_config(&text, experiment)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Runs the parsed command and returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    match &cli.command {
        Command::Experiment { name } => {
            let cfg = load(cli, Some(name.parse()?))?;
            run_and_write(&cfg, &cli.out, cli.format)
        }
        Command::SolveMarkov => solve_markov_cmd(&load(cli, None)?, &cli.out, cli.format),
        Command::OptimizeThreshold => optimize_threshold_cmd(&load(cli, None)?, &cli.out, cli.format),
        Command::Simulate { policy, trace } => simulate_cmd(&load(cli, None)?, *policy, *trace, &cli.out, cli.format),
    }
}
