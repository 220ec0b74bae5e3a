use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid shape {rows}x{cols} for {len} entries")]
    InvalidShape {
        rows: usize,
        cols: usize,
        len: usize,
    },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("invalid exponent p = {p}: {reason}")]
    InvalidExponent { p: f64, reason: &'static str },

    #[error("matrix is not Hermitian positive semidefinite (defect {defect:e})")]
    NotPsd { defect: f64 },

    #[error("diagonal entry {index} is nonzero")]
    NonZeroDiagonal { index: usize },

    #[error("dimension {0} is odd")]
    OddDimension(usize),

    #[error("{what} = {value} exceeds the limit {max}")]
    TooLarge {
        what: &'static str,
        value: u64,
        max: u64,
    },

    #[error("index {index} out of range (limit {len})")]
    IndexOutOfRange { index: u64, len: u64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical decomposition failed: {0}")]
    Decomposition(&'static str),

    #[error("no admissible balanced split found: {0}")]
    SplitNotFound(String),

    /// A proven inequality failed numerically. Always a bug, never a counterexample.
    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical failures, as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Decomposition(_) | Error::InvariantViolated(_) | Error::SplitNotFound(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
