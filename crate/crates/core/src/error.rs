use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants split into two families: validation problems with the caller's
/// input (bad arguments, malformed files) and numeric failures (degenerate or
/// singular data). The CLI maps them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("signal too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("unvoiced: no voiced frames found")]
    Unvoiced,

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the data's numerics rather than by invalid input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::ZeroVariance(_) | Error::Singular(_) | Error::Unvoiced
        )
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
