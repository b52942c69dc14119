use thiserror::Error;

/// Errors raised by the vibrometer pipeline.
///
/// The variants are coarse on purpose: the CLI maps them onto stable exit
/// codes (validation, resource cap, internal invariant).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("qubit count mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{what} = {value} exceeds the limit of {limit}")]
    ResourceCap {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("Hermiticity violated: {0}")]
    Hermiticity(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
