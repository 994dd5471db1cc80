use thiserror::Error;

/// Errors raised by mesh handling, discretization and time integration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mesh topology error: {0}")]
    Topology(String),
    #[error("cell {cell} is inverted or degenerate")]
    InvertedCell { cell: usize },
    #[error("cell {cell} is not convex")]
    NonConvexCell { cell: usize },
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("mass matrix block {block} is not positive definite")]
    NotPositiveDefinite { block: usize },
    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("non-finite value in the solution at step {step}")]
    NonFinite { step: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
