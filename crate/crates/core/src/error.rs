use thiserror::Error;

/// Errors surfaced by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grade mismatch: {left} vs {right}")]
    GradeMismatch { left: usize, right: usize },

    #[error("grade overflow: {left} + {right} exceeds ambient dimension {n}")]
    GradeOverflow { left: usize, right: usize, n: usize },

    #[error("ambient dimension {0} outside supported range 1..=8")]
    UnsupportedDimension(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unbounded body: {0}")]
    Unbounded(String),

    #[error("did not converge after {iters} iterations: {detail}")]
    NoConvergence { iters: usize, detail: String },

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },

    #[error("io error on {path}: {detail}")]
    Io { path: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
