use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain of an operation (bad dimensions, zero direction, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to meet its accuracy contract.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A value could not be constructed from the given parts.
    #[error("construction error: {0}")]
    Construction(String),

    /// A simulation was started from a state that violates its preconditions.
    #[error("setup error: {0}")]
    Setup(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
