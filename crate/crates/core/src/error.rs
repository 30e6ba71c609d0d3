use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix `{what}` is not Hermitian: |a[{row}][{col}] - conj(a[{col}][{row}])| = {defect:e}")]
    NotHermitian {
        what: String,
        row: usize,
        col: usize,
        defect: f64,
    },

    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("invalid angular-momentum labels: {0}")]
    InvalidLabels(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("weight support is disconnected; components: {blocks:?}")]
    Disconnected { blocks: Vec<Vec<usize>> },

    #[error("stress increased from {before:e} to {after:e} at iteration {iteration}")]
    StressIncreased { iteration: usize, before: f64, after: f64 },

    #[error("unknown {kind} `{name}`; available: {available}")]
    UnknownName {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("unsupported file format version {0}")]
    FormatVersion(u32),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from bad user input rather than the environment.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}
