use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: empty design, NaN, length mismatch, bad file.
    #[error("invalid input: {0}")]
    Structural(String),
    /// A documented precondition does not hold.
    #[error("contract violation: {0}")]
    Contract(String),
    /// The request is well formed but outside what this build supports.
    #[error("refused: {0}")]
    Refusal(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
    pub fn refusal(msg: impl Into<String>) -> Self {
        Error::Refusal(msg.into())
    }
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Refusal(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
