use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the sensing toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is out of range or two inputs disagree on dimensions.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The input is numerically degenerate (zero rank, zero column, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A textual file (config, CSV, operator dump) could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
