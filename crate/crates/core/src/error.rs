use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// The configuration text could not be parsed.
    #[error("config error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },

    /// A configuration field violates its invariant.
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    /// An override named a key that does not exist.
    #[error("unknown key `{0}`")]
    UnknownKey(String),

    /// An API precondition was violated (dimension mismatch, bad index,
    /// state incompatible with a scheme).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The zero-forcing Gram matrix at a subcarrier is not invertible.
    #[error("channel matrix at subcarrier {subcarrier} is rank deficient")]
    Singular { subcarrier: usize },

    /// A brute-force search would exceed its evaluation budget.
    #[error("brute-force grid has {points} candidates, above the limit of {limit}")]
    SizeGuard { points: u64, limit: u64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(field: &str, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
