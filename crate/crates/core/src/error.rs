use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point has zero dimension")]
    ZeroDimension,

    #[error("non-finite coordinate {value} at position {position}")]
    NonFinite { position: usize, value: f64 },

    #[error("point set must be non-empty")]
    EmptySet,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} is out of range for a sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no candidate qualified for the limit set")]
    EmptyLimit,

    #[error("hypothesis violated at index {index}: distance {distance} is not below epsilon {epsilon}")]
    HypothesisViolated { index: usize, distance: f64, epsilon: f64 },

    #[error("prefix exhausted while choosing chain level {level}")]
    PrefixExhausted { level: usize },

    #[error("system is not contractive: factor {factor} >= 1")]
    NotContractive { factor: f64 },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: line {line}: ragged row with {found} columns, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{0}: cloud contains no points")]
    EmptyCloud(PathBuf),

    #[error("{0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of an analysis on otherwise valid data.
    pub fn is_analysis(&self) -> bool {
        matches!(
            self,
            Error::EmptyLimit
                | Error::HypothesisViolated { .. }
                | Error::PrefixExhausted { .. }
                | Error::NotContractive { .. }
        )
    }
}
