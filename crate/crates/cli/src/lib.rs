//! Configuration-driven experiment runner for `csma-core`.
//!
//! A TOML file describes a topology, a load sweep, strategies and the
//! analyses to run; results are written as CSV tables into an output
//! directory. The two simulation figures ship as built-in scenarios
//! (`csma reproduce fig1|fig2`).

pub mod analysis;
pub mod config;
pub mod describe;
pub mod figures;
pub mod results;
pub mod run;
pub mod scenario;

use std::fmt;

pub use config::ExperimentConfig;
pub use results::ResultRow;
pub use run::{run_config, Stages};
pub use scenario::Scenario;

/// Errors reported by the runner; each maps to a process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed configuration text; the message names the line and field.
    Parse(String),
    Validation(String),
    /// A cap was exceeded.
    Resource(String),
    Core(csma_core::Error),
}

impl CliError {
    /// 0 ok, 1 validation, 2 resource.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Resource(_) | CliError::Core(csma_core::Error::Resource { .. }) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "configuration error: {m}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Resource(m) => write!(f, "resource error: {m}"),
            CliError::Core(e @ csma_core::Error::Resource { .. }) => write!(f, "resource error: {e}"),
            CliError::Core(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<csma_core::Error> for CliError {
    fn from(e: csma_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(csma_core::Error::Io(e.to_string()))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Core(csma_core::Error::Io(e.to_string()))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
