use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated a precondition (bad argument, mismatched sizes).
    #[error("usage error: {0}")]
    Usage(String),

    /// Input data could not be parsed.
    #[error("format error: {0}")]
    Format(String),

    /// A configured resource ceiling was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// An internal consistency check failed.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
