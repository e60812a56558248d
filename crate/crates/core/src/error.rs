use thiserror::Error;

/// Errors returned by the library.
///
/// Precondition violations are reported as [`Error::InvalidInput`]; the
/// other variants name conditions that callers commonly want to match on.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(String, String),

    #[error("residue conditions have no common solution")]
    InconsistentCongruences,

    #[error("parse error: {0}")]
    Parse(String),

    /// A result that was recomputed after construction did not match what the
    /// construction guarantees. Seeing this means there is a bug.
    #[error("internal verification failed: {0}")]
    Verification(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
