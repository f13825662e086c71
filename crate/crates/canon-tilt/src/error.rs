use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Compute(#[from] canon_core::Error),
}

impl CliError {
    /// Usage and config errors come with the command's parameter schema.
    pub fn wants_schema(&self) -> bool {
        matches!(self, CliError::Usage(_) | CliError::Config(_))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
