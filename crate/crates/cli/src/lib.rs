//! Experiment harness and command line for `krausprop-core`.

pub mod commands;
pub mod emit;
pub mod experiment;
pub mod parallel;
pub mod schema;

use thiserror::Error;

pub use experiment::{run_experiment, ExperimentResult};
pub use schema::{ConfigError, ExperimentConfig};

/// Exit status for malformed input.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status for failures after the input was accepted.
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Validation(String),
    #[error("{0:#}")]
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn runtime<E: Into<anyhow::Error>>(e: E) -> Self {
        CliError::Runtime(e.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<emit::EmitError> for CliError {
    fn from(e: emit::EmitError) -> Self {
        CliError::runtime(e)
    }
}
