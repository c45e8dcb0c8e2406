use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two summaries (or vectors) that must share a shape do not.
    #[error("cardinality mismatch: {what} ({left} vs {right})")]
    CardinalityMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("non-finite value at {0}")]
    NonFinite(String),

    #[error("graph is disconnected: spanning forest has {found} edges, expected {expected}")]
    Disconnected { found: usize, expected: usize },

    /// Malformed file contents; the message names the offending location.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
