//! Experiment harness for the IRS-assisted vehicular edge computing models:
//! configuration files, paired-seed runs, CSV metrics and plot tables.

use std::path::PathBuf;

pub mod checkpoint;
pub mod config;
pub mod experiment;
pub mod oracle;
pub mod plot;

pub use config::{ConfigError, ExperimentConfig};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] irsmec_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("metrics not found at {0}")]
    MissingMetrics(PathBuf),
}

impl Error {
    /// Process exit code: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Model(irsmec_core::Error::Config { .. }) => 2,
            _ => 3,
        }
    }
}
