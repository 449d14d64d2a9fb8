use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index ({row}, {col}) out of bounds for dimension {n}")]
    IndexOutOfBounds { row: usize, col: usize, n: usize },

    #[error("invalid compressed storage: {0}")]
    InvalidStorage(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("grid extents must be positive, got {nx}x{ny}x{nz}")]
    ZeroExtent { nx: usize, ny: usize, nz: usize },

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row}: diagonal entry {value} must be positive")]
    NonPositiveDiagonal { row: usize, value: f64 },

    #[error("row {row}: off-diagonal entry at column {col} gives negative transition probability")]
    NegativeProbability { row: usize, col: usize },

    #[error("row {row}: matrix is not diagonally dominant (home escape probability {escape})")]
    NotDominant { row: usize, escape: f64 },

    #[error("matrix rejected: {0}")]
    Admission(String),

    #[error("walk from node {start} exceeded {cap} steps")]
    StepCapExceeded { start: usize, cap: u64 },

    #[error("row {row}: no multi-step walks recorded but the stochastic term is needed")]
    InsufficientWalks { row: usize },

    #[error("walk from {start} must end at a lower-ordered home, got {end}")]
    IllegalWalkEnd { start: usize, end: usize },

    #[error("walk from {start} has length {length}; one-step walks are excluded")]
    OneStepWalk { start: usize, length: u64 },

    #[error("row {row}: non-positive pivot {value}")]
    NonPositivePivot { row: usize, value: f64 },

    #[error("invalid stopping criterion: {0}")]
    InvalidCriterion(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
