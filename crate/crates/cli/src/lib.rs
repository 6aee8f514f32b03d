//! Configuration-driven experiment runner around `savetx`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{validate_config, ExperimentConfig, ExperimentName};
pub use error::{CliError, Result};
pub use experiments::{run_experiment, ExperimentResult};
