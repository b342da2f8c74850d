//! Command-line front end for `jeffreys-core`: scenario configs, CSV traces
//! and JSON reports.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{Failure, Outcome};
pub use config::{RunConfig, Scenario, FORMAT_VERSION};
