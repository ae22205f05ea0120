use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the simulator, the learners and the run harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("action {action} out of codebook range (size {size})")]
    ActionOutOfRange { action: usize, size: usize },

    #[error("replay buffer not ready: {len} stored, {needed} needed")]
    NotReady { len: usize, needed: usize },

    #[error("missing checkpoint {0}")]
    MissingCheckpoint(PathBuf),

    #[error("malformed checkpoint {path}: {reason}")]
    BadCheckpoint { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
