use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Array shapes disagree with the declared grid or geometry.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An input violates an operation's precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A non-finite value appeared during an iterative computation.
    #[error("numerical failure at step {step}: {what}")]
    Numerical { step: usize, what: String },

    /// Unknown option name or inconsistent configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
