//! Command-line front end for [`cvoa`]: configuration files, seeded single and
//! multi-strain runs, per-iteration CSV traces and run summaries.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod report;

pub use commands::{run_command, sweep_command, Overrides};
pub use config::{CodecConfig, RunConfig};
pub use error::CliError;
pub use report::{Aggregates, RunRecord, RunSummary, SweepRow};
