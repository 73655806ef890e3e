//! Error type shared across the crate.

/// Errors raised by numerical operations in this crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A solution exists but could not be bracketed / reached in the search range.
    #[error("range error: {0}")]
    Range(String),
    /// An intermediate value failed a numerical sanity check.
    #[error("numerical instability: {0}")]
    Instability(String),
    /// Not enough observations to carry out the request.
    #[error("insufficient data: have {count}, need at least {need}")]
    InsufficientData { count: usize, need: usize },
    /// Degenerate input to a statistical fit.
    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
}
