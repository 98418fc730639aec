//! Batch driver for `hqam-core`: reads an experiment file, runs the sweep
//! on a worker pool and writes one CSV row per sweep point, seed and mode.

pub mod config;
pub mod experiment;

pub use config::{validate_config, ConfigError, Diagnostic, ExperimentConfig};
pub use experiment::{run_experiment, write_csv, write_trace, ExperimentError, Row};
