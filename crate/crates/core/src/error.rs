use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("alist line {line}: {message}")]
    Alist { line: usize, message: String },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("row group {group} overlaps at column {column}")]
    RowOverlap { group: usize, column: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("numerical tolerance violated: {0}")]
    Tolerance(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
