//! Experiment runner for the `cuspdisc` command line tool.

pub mod config;
pub mod runner;

pub use config::{Experiment, ExperimentConfig};
pub use runner::{evaluate, run, Invariant, Report, RunError};
