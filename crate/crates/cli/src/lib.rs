//! Batch front end for `cellfade`: scenario files in, CSV tables out.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{run, Command, Output, RunOptions};
pub use config::ScenarioConfig;
pub use error::CliError;

/// Exit status when a Monte Carlo estimate disagrees with its analytic value.
pub const EXIT_MISMATCH: i32 = 4;
