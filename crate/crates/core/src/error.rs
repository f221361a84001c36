use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the translation engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid token {0:?}")]
    InvalidToken(String),

    #[error("empty index")]
    EmptyIndex,

    #[error("undefined similarity: both sequences are empty")]
    UndefinedSimilarity,

    #[error("pair id {0} is already indexed")]
    DuplicateId(u32),

    #[error("malformed index file: {0}")]
    IndexFormat(String),

    #[error("malformed weight file: {0}")]
    WeightFormat(String),

    #[error("token id {id} out of range for vocabulary of size {size}")]
    InvalidTokenId { id: u32, size: usize },

    #[error("empty source sentence")]
    EmptySource,

    #[error("prefix must begin with the begin-of-sentence id")]
    MissingBos,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty neighbor set")]
    EmptyNeighbors,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid {field}: {message}")]
    InvalidConfig {
        field: &'static str,
        message: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
