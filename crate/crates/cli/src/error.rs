use std::path::PathBuf;

use thiserror::Error;

/// Usage problems exit with 1, numerical failures with 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] selectrelax::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("job file {path}: {message}")]
    Job { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use selectrelax::Error as E;
        match self {
            CliError::Core(E::Singular { .. } | E::NonFinite { .. } | E::ZeroState | E::TooFewPoints { .. }) => 2,
            _ => 1,
        }
    }
}
