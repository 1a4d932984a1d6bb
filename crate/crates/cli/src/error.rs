use std::path::PathBuf;

use astarccg::io::IoError;
use astarccg::{OracleError, ScoreError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Scores {
        path: PathBuf,
        #[source]
        source: ScoreError,
    },
    #[error(transparent)]
    Input(#[from] IoError),
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Bound(#[from] OracleError),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    /// Short machine-readable class printed after `error:`.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Scores {
                source: ScoreError::Io(_),
                ..
            } => "io",
            CliError::Scores { .. } => "format",
            CliError::Input(IoError::Io { .. }) => "io",
            CliError::Input(IoError::Config { .. }) | CliError::Config(_) => "config",
            CliError::Input(_) | CliError::Mismatch(_) => "format",
            CliError::Bound(_) => "bound",
            CliError::Output(_) => "io",
        }
    }
}
