//! Command-line runner: reads an [`ExperimentConfig`], sweeps the
//! (recool, readout) grid and writes CSV and JSON reports.
//!
//! Every report starts with its provenance: command, seed, mode and the
//! fully resolved configuration. Output bytes depend only on those, not on
//! the number of worker threads.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{run, Command, Overrides};
pub use config::{ExperimentConfig, Format};
pub use error::CliError;
