use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed text input; `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid input: {0}")]
    Input(String),
    /// The requested quantity is undefined for this argument (e.g. the
    /// conductance of the empty set).
    #[error("undefined: {0}")]
    Domain(String),
    /// A documented precondition of an operation was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for caller contract violations, as opposed to bad input data.
    pub fn is_contract(&self) -> bool {
        matches!(self, Error::Contract(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
