use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed numeric input: non-finite entries, bad probability vectors,
    /// invalid solver configuration, and the like.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Shapes of a game, profile, or vector do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Input is outside the mathematical domain of a closed-form routine.
    #[error("domain error: {0}")]
    Domain(String),

    /// A file parsed but its contents are inconsistent, or did not parse at all.
    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
