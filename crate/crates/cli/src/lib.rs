//! Experiment driver: frequency tables, IDS curves, bound certificates and
//! convergence sweeps, written as CSV/JSON for plotting.

pub mod config;
pub mod model;
pub mod run;

pub use config::{ExperimentConfig, ModelKind, NuRef, Overrides};
pub use model::Model;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("numerical failure: {0}")]
    Numerical(ids_core::Error),
    #[error("certificate violation: {0}")]
    Certificate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Certificate(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<ids_core::Error> for CliError {
    fn from(e: ids_core::Error) -> Self {
        use ids_core::Error::*;
        match e {
            NonConvergence(_) | NotInvariant { .. } | NoOccurrence { .. } => CliError::Numerical(e),
            _ => CliError::Config(e.to_string()),
        }
    }
}
