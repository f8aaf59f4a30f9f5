use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the arguments of an operation does not hold.
    #[error("domain error: {0}")]
    Domain(String),

    /// Every spectral coefficient sits on the zero eigenvalue, so a ratio
    /// against the spectral side is undefined.
    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
