use thiserror::Error;

/// Errors produced by the shaping, simulation and voting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("correlation undefined: both sequences are constant")]
    UndefinedCorrelation,

    #[error("non-finite value in {context}")]
    NonFinite { context: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
