use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    /// Input data violates a precondition (empty intersection, bad partition, ...).
    #[error("data error: {0}")]
    Data(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A draw or factorization produced something unusable.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("non-finite {parameter} at iteration {iteration}")]
    NonFinite {
        iteration: usize,
        parameter: &'static str,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command line front end:
    /// 2 usage/config, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } | Error::Parse(_) | Error::Data(_) => 3,
            Error::Numeric(_) | Error::NonFinite { .. } => 4,
        }
    }
}
