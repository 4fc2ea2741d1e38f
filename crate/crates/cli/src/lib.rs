//! Config-driven experiment runs for the ionjump simulator: rate prediction,
//! analytic and Monte Carlo scans, trace simulation and analysis.
//!
//! Every output file carries the SHA-256 digest of the resolved
//! configuration. Results depend only on the configuration and seed, never on
//! the number of worker threads.

pub mod cli;
pub mod commands;
pub mod config;
mod error;
pub mod report;

pub use cli::{run, Cli, Command};
pub use config::ExperimentConfig;
pub use error::CliError;
