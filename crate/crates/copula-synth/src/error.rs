//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Cholesky factorization hit a non-positive pivot. `pivot` is the
    /// zero-based column at which the factorization failed.
    #[error("matrix is not positive definite: pivot {pivot} is not positive")]
    NotPositiveDefinite { pivot: usize },

    /// Input is structurally valid but statistically degenerate
    /// (constant column, zero rank variance, collapsed contingency table).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Two tables (or a table and a model) disagree on columns.
    #[error("schema mismatch: {0}")]
    Schema(String),

    /// A table or matrix has an incompatible shape.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Malformed input file. `line` is one-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A serialized model or report could not be understood.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
