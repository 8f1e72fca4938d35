use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::scorer::AdapterError;

/// A malformed input line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// Errors that abort a command.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", .path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("scorer '{id}': {source}")]
    Scorer { id: String, source: AdapterError },
    #[error(transparent)]
    Stats(#[from] uidlab_core::stats::StatsError),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}
