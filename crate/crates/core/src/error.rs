use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: dimension {dim} value {value} outside [{low}, {high}]")]
    OutOfRange {
        what: &'static str,
        dim: usize,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    Dimension {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty data: {0}")]
    EmptyData(&'static str),

    #[error("usage error: {0}")]
    Usage(&'static str),

    #[error("parse error in {source_name} at byte {offset}: {message}")]
    Parse {
        source_name: String,
        offset: usize,
        message: String,
    },

    #[error("non-finite metric `{metric}` at generation {generation}")]
    NonFinite { metric: &'static str, generation: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
