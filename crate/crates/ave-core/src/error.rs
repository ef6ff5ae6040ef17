//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by problem construction, linear algebra kernels, solvers
/// and file I/O.
#[derive(Debug, Error)]
pub enum AveError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerically singular matrix: {0}")]
    SingularMatrix(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("no convergence within {max_iter} iterations: {what}")]
    NoConvergence { what: String, max_iter: usize },

    #[error("theta bound not applicable: inverse norm {inverse_norm} >= 1/3")]
    BoundNotApplicable { inverse_norm: f64 },

    #[error("contraction factor undefined: inverse norm {inverse_norm} >= 1")]
    FactorUndefined { inverse_norm: f64 },

    #[error("matrix A - D(x) not invertible for sign pattern {pattern}")]
    NotInvertible { pattern: String },

    #[error("problem size {n} exceeds limit {max} for this operation")]
    SizeLimit { n: usize, max: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("empty results table")]
    EmptyResults,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AveError>;
