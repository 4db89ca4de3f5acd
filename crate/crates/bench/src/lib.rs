//! Experiment harness: TOML configs in, CSV tables out.
//!
//! A config describes a problem (diagonal spectral model or the BLT disk),
//! a list of methods, noise levels and an optional one-parameter sweep.
//! [`run_config`] runs every combination and returns [`Record`]s in
//! declaration order, independent of the worker count.

pub mod checks;
pub mod config;
pub mod error;
pub mod output;
pub mod problem;
pub mod rates;
pub mod run;

pub use config::ExperimentConfig;
pub use error::{BenchError, Result};
pub use run::{run_config, Record, RunOptions};
