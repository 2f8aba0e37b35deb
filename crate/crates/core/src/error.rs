use thiserror::Error;

use crate::mapping::FitTrace;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A malformed input row; `line` is 1-based within the file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent configuration (mismatched sizes, missing columns,
    /// duplicate labels, unsupported scheme for an operation).
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical failure while computing (overflow, non-finite value).
    #[error("computation error: {0}")]
    Computation(String),

    /// The shape-parameter fit diverged; the trace collected so far is
    /// attached for inspection.
    #[error("fit error: {message}")]
    Fit { message: String, trace: FitTrace },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for usage/configuration
    /// problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
