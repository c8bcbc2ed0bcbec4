//! Command-line front end: argument handling, text ingestion and the
//! experiment runner behind the `bmatch` binary.

pub mod config;
pub mod experiment;
pub mod text;

pub use config::{Algorithm, Args, Input, RunConfig};
pub use experiment::{execute, run_experiment, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Runtime(#[from] bmatch_core::Error),
}

impl RunError {
    /// Process exit code: 2 for bad configuration, 3 for failures while
    /// running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Runtime(_) => 3,
        }
    }
}
