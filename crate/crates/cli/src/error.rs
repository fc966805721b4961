use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad model, config or analysis input.
    #[error("{0}")]
    Semantic(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// A resource cap was hit.
    #[error("{0}")]
    Cap(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Semantic(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Cap(_) => 3,
        }
    }
}

pub fn semantic(e: impl std::fmt::Display) -> CliError {
    CliError::Semantic(e.to_string())
}
