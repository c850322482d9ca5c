use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on caller-supplied data does not hold.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A path is not a legal walk on the map (teleport, blocked cell, wrong endpoints).
    #[error("invalid path for agent {agent}: {reason}")]
    InvalidPath { agent: usize, reason: String },

    /// Benchmark file syntax error; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no initial solution after {attempts} prioritized-planning attempts")]
    NoInitialSolution { attempts: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
