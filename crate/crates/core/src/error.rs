use thiserror::Error;

/// Errors raised while parsing sequence expressions, evaluating terms, or
/// running analyses.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("evaluation error at index {index}: {message}")]
    Eval { index: i64, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn eval(index: u64, message: impl Into<String>) -> Self {
        Error::Eval {
            index: index as i64,
            message: message.into(),
        }
    }

    pub(crate) fn eval_signed(index: i64, message: impl Into<String>) -> Self {
        Error::Eval {
            index,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
