//! Crate-wide error type.

/// Errors raised by samplers, models, and the experiment runner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A vector or matrix had the wrong dimension for the operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An argument was outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A sampler or experiment was configured inconsistently.
    #[error("configuration error: {0}")]
    Config(String),

    /// A matrix factorization failed (e.g. a non-positive Cholesky pivot).
    #[error("decomposition error: {0}")]
    Decomposition(String),

    /// A time series was unusable for the requested diagnostic.
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    /// An internal invariant that callers must uphold was violated.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A chain produced a non-finite value.
    #[error("non-finite value at iteration {iteration}: {detail}")]
    NonFinite { iteration: usize, detail: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
