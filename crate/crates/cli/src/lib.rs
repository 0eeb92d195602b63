//! Batch front end: `train`, `audit`, `verify` and `classify`.

pub mod commands;
pub mod config;
pub mod report;
pub mod verify;

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config {}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("{0}")]
    Diverged(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for configuration and input problems, 2 for diverged training,
    /// 3 for a failed verification suite, 4 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 1,
            CliError::Diverged(_) => 2,
            CliError::VerifyFailed(_) => 3,
            CliError::Io { .. } | CliError::Runtime(_) => 4,
        }
    }
}
