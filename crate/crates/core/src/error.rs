use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: n = {n}, d = {d} (both must be at least 1)")]
    InvalidDimension { n: usize, d: usize },

    #[error("invalid k = {k} for d = {d} (need 1 <= k <= d)")]
    InvalidK { k: usize, d: usize },

    #[error("invalid top-k vector: {0}")]
    InvalidVector(String),

    #[error("invalid column sum {sum} for length {n} (need |s| <= n and s = n mod 2)")]
    InvalidSum { n: usize, sum: i64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid privacy budget epsilon = {0} (must be > 0)")]
    InvalidBudget(f64),

    #[error("outside the supported regime: {0}")]
    InvalidRegime(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

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

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// True for failures of the underlying filesystem rather than of the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Csv { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
