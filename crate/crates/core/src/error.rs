use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("learning task unsatisfiable: {0}")]
    Unsatisfiable(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
