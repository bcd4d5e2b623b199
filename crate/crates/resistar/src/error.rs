use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-side contract was violated (wrong store variant, empty
    /// boundary set where one is required, mismatched plane count, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Numerically degenerate input (near-zero ray direction).
    #[error("numeric degeneracy: {0}")]
    Numeric(String),

    /// A persisted store failed validation on load.
    #[error("corrupt store: {0}")]
    Corrupt(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
