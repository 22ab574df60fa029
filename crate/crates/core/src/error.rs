use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A dimension or length precondition was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A numeric argument lies outside its valid domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix construction failed: {0}")]
    Construction(String),

    #[error("alist parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    PathIo {
        path: String,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn path_io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::PathIo {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
