//! Experiment driver behind the `mvsim` binary: configuration, schedules for
//! the named experiments, trace export and text displays.

pub mod circuit;
pub mod config;
pub mod display;
pub mod error;
pub mod experiment;
pub mod export;
pub mod numfmt;

pub use config::{ExperimentConfig, ExperimentKind, OutputFormat, RawConfig};
pub use error::{CliError, CliResult};
