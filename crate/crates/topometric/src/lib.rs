//! File formats, configuration and experiment driver around
//! [`topometric_core`].
//!
//! Everything here is deterministic: the same spec and seed produce
//! byte-identical artifacts.

pub mod config;
pub mod error;
pub mod experiment;
pub mod format;
pub mod report;

pub use config::{ExperimentSpec, ScenarioSource};
pub use error::{Error, ErrorKind, Result};
pub use experiment::{run_experiment, sweep, Outcome};
