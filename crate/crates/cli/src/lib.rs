//! The `jetflow` front end: system files, the analysis pipeline and its
//! JSON report.

pub mod commands;
pub mod report;
pub mod spec;

pub use commands::{analyze, bracket, integrate, Analysis, BracketReport, Integration};
pub use report::Report;
pub use spec::{load, parse_spec, Loaded};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed system files, expressions or arguments.
    #[error("input error: {0}")]
    Input(String),
    /// A structural hypothesis of the analysis does not hold for the system.
    #[error("assumption failed: {0}")]
    Assumption(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Assumption(_) => 3,
        }
    }
}
