use std::io;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// Variants fall into three families that map onto process exit codes:
/// usage errors (bad flags or configuration), data errors (malformed or
/// inconsistent inputs) and numerical failures (non-finite values,
/// non-convergence).
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{what} line {line}: {message}")]
    Format {
        what: &'static str,
        line: usize,
        message: String,
    },

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("document `{0}` is unlabeled")]
    Unlabeled(String),

    #[error("no parse for document `{0}`")]
    MissingParse(String),

    #[error("parse id `{parse}` does not match document id `{doc}`")]
    IdMismatch { doc: String, parse: String },

    #[error("{0}")]
    Data(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn format(what: &'static str, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            what,
            line,
            message: message.into(),
        }
    }

    /// Short machine-readable class of the error.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "usage",
            Error::Numerical(_) => "numerical",
            _ => "data",
        }
    }

    /// Process exit code: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" => 1,
            "numerical" => 3,
            _ => 2,
        }
    }
}
