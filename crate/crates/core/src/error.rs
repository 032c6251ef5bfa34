use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("index {index} out of range for a grid of {n} intervals")]
    Index { index: usize, n: usize },

    #[error("malformed structure: {0}")]
    Structure(String),

    /// The sample is too sparse for a geometric query to be answered.
    #[error("sampling density: {0}")]
    Density(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("format: {0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Param(msg.into())
}
