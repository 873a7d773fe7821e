use thiserror::Error;

/// Errors produced by the optimizer library.
#[derive(Debug, Error)]
pub enum Error {
    /// Vector dimensions disagree between arguments that must match.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A numeric input or result contains NaN or infinity.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// A parameter or option is outside its valid range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A binary file does not match the expected layout.
    #[error("format error: {0}")]
    Format(String),

    /// Parsed data is internally inconsistent (e.g. counts disagree).
    #[error("inconsistent data: {0}")]
    Consistency(String),

    /// An operation was called outside its documented protocol.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
