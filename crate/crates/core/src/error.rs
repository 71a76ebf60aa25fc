use thiserror::Error;

/// Errors raised by the library. Variants map onto distinct failure classes so
/// that callers (the CLI in particular) can translate them into exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A degenerate geometric query, e.g. the line through a point and itself.
    #[error("degenerate query: {0}")]
    Degenerate(String),

    /// Arithmetic domain error such as inverting zero.
    #[error("domain error: {0}")]
    Domain(String),

    /// A construction would exceed a configured size bound.
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),

    /// The numerical method failed (singular pivot, divergence, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An internal invariant was violated. These indicate a bug.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// Malformed input file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
