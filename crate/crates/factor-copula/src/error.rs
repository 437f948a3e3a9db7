//! Error type shared across the toolkit.

use thiserror::Error;

/// Errors produced by copula construction, evaluation, and estimation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum FcError {
    /// A parameter or argument lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested operation is not defined for this family or configuration
    /// (for example the density of a copula with a singular component).
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A numeric routine failed to reach its target (integration, root
    /// finding, or optimisation did not converge, or produced non-finite
    /// values).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A model-specification file or data file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse {
        /// 1-based line number in the offending file.
        line: usize,
        /// Description of the problem.
        msg: String,
    },

    /// Input data violates a precondition (wrong shape, constant column, ...).
    #[error("invalid data: {0}")]
    Data(String),
}

impl FcError {
    /// Short machine-readable code used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            FcError::Domain(_) => "domain",
            FcError::Unsupported(_) => "unsupported",
            FcError::Numeric(_) => "numeric",
            FcError::Parse { .. } => "parse",
            FcError::Data(_) => "data",
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, FcError>;
