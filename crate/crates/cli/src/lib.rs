//! Experiment runner for the archerfish optimizer: TOML-configured seeded
//! batches, CSV results and summaries, and replays of the published
//! Friedman and signed-rank decisions.

pub mod analysis;
pub mod app;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod seeds;
pub mod store;

pub use config::{BudgetRule, ExperimentConfig};
pub use error::CliError;
pub use experiment::{plan, run_experiment, Cell, ResultsStore};
pub use fixtures::{replay_paper_stats, ReplayReport};
