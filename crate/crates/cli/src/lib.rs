//! Command-line laboratory: configures experiments, runs seeded batches in
//! parallel and writes JSON-lines, CSV and summary reports.

pub mod app;
pub mod config;
pub mod output;
pub mod runner;

pub use config::{Experiment, ExperimentConfig, Overrides};
pub use runner::{run_experiment, Aggregate, Report, TrialRecord};
