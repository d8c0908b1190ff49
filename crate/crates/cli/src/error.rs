use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Schema(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed artifact {path}: {msg}")]
    Artifact { path: PathBuf, msg: String },

    #[error(transparent)]
    Compute(#[from] polarmem::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn artifact(path: &Path, msg: impl Into<String>) -> Self {
        CliError::Artifact {
            path: path.to_owned(),
            msg: msg.into(),
        }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => crate::EXIT_SCHEMA,
            CliError::Io { .. } | CliError::Artifact { .. } => crate::EXIT_IO,
            CliError::Compute(_) => crate::EXIT_FAILURE,
        }
    }
}
