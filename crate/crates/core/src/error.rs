use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter or dimension mismatch.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Input data contains non-finite values or is otherwise unusable.
    #[error("data error: {0}")]
    Data(String),

    /// A formula was evaluated outside the range where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Index arithmetic would overflow.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// An operation was called on a value that does not satisfy its precondition.
    #[error("contract error: {0}")]
    Contract(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach context (for instance the grid point that produced the error).
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with all context layers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by the caller's parameters rather than by
    /// runtime data or I/O.
    pub fn is_usage(&self) -> bool {
        matches!(
            self.root(),
            Error::Parameter(_) | Error::Domain(_) | Error::Capacity(_)
        )
    }
}
