use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (pivot {pivot} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },

    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("iterative solver broke down at iteration {iteration}")]
    Breakdown { iteration: usize },

    #[error("eigensolver did not converge after {restarts} restarts (max residual {max_residual:e})")]
    EigenNotConverged {
        restarts: usize,
        max_residual: f64,
        partial: Box<crate::eigen::EigenSolveResult>,
    },

    #[error("vector has vanishing boundary trace (x.B.x = {0:e})")]
    TraceVanishes(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
