//! Error type shared by all modules.

use alloc::string::String;

/// Errors surfaced by geometry, barrier, solver, and learner operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A vector had the wrong length for the operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point lies on or outside the barrier domain.
    #[error("outside barrier domain: {0}")]
    DomainViolation(String),

    /// A matrix was numerically singular (point effectively on the boundary).
    #[error("ill-conditioned matrix: eigenvalue {min_eigenvalue:e} below threshold")]
    IllConditioned { min_eigenvalue: f64 },

    /// Iterative solver exhausted its iteration budget.
    #[error("solver did not converge within {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::DomainViolation(msg.into())
    }
}
