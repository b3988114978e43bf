//! Experiment plumbing: configuration, training runs, artifacts.
//!
//! The harness owns everything that is about *running studies* rather than
//! about the algorithms themselves: parsing config files, the per-seed
//! training loop, CSV emission and re-parsing, chart drawing, and the
//! baseline-vs-maximized aggregation.

pub mod chart;
pub mod config;
pub mod csvio;
pub mod experiment;
pub mod runner;

pub use chart::{LineChart, ScatterChart, Series};
pub use config::{ConfigError, EnvId, ExperimentConfig, MaximizerConfig};
pub use csvio::{CsvError, TraceRow};
pub use experiment::{
    aggregate_runs, run_experiment, AggregateStats, ArmStats, ExperimentOutcome,
};
pub use runner::{run_training, RunResult, Snapshot};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("seed {seed} {} episode {episode}: {message}", if *.maximized { "maximized" } else { "baseline" })]
    Run { seed: u64, maximized: bool, episode: usize, message: String },
    #[error("aggregation: {message}")]
    Aggregate { message: String },
}
