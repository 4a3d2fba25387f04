//! Experiment harness for `implicit_online`: synthetic runs, `beta` sweeps
//! over LIBSVM datasets, and a self-check of the regret certificates.

use std::path::{Path, PathBuf};

pub mod checks;
pub mod config;
pub mod experiments;
mod output;

pub use checks::{cmd_check, CheckOutcome, CheckParams, CheckReport, Fault};
pub use config::{BetaGrid, ConfigLayer, ExperimentConfig, LossFamily};
pub use experiments::{cmd_sweep, cmd_synthetic, RunReport, SummaryRow, SweepRow};

/// Environment variable capping the sweep worker pool.
pub const THREADS_ENV: &str = "IMPLICIT_ONLINE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Core(#[from] implicit_online::Error),
    #[error(transparent)]
    Oracle(#[from] implicit_online_oracle::OracleError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
