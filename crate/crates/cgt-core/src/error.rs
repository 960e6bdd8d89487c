use thiserror::Error;

/// Errors produced by construction, decoding, verification, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the inputs was violated (bad sizes, out-of-range
    /// indices, invalid parameter combinations).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The backtracking search was asked for an unattainable product target.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// A brute-force verifier refused to run because the instance exceeds
    /// the default enumeration guard.
    #[error("verification guard exceeded: {0} (use force to override)")]
    GuardExceeded(String),

    /// Test outcomes are inconsistent with any defective set the protocol
    /// supports, or a decoded index falls outside the declared item range.
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    /// A matrix or outcome file failed to parse.
    #[error("malformed file at line {line}: {msg}")]
    Malformed { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn malformed(line: usize, msg: impl Into<String>) -> Self {
        Error::Malformed {
            line,
            msg: msg.into(),
        }
    }
}
