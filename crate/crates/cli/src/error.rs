use enlab_core::concept::ConceptError;
use enlab_core::dataset::DatasetError;
use enlab_core::{EntropyError, ErrorKind, HopfieldError, McpError, ReductionError};
use thiserror::Error;

/// Failure of a command, classified by the exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Capacity(String),
    #[error("invariant breach: {0}")]
    Invariant(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    pub fn from_kind(kind: ErrorKind, message: String) -> Self {
        match kind {
            ErrorKind::Validation | ErrorKind::Domain => CliError::Validation(message),
            ErrorKind::Capacity => CliError::Capacity(message),
            ErrorKind::Invariant => CliError::Invariant(message),
            ErrorKind::Numeric => CliError::Other(message),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Other(format!("{}: {e}", path.display()))
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::from_kind(e.kind(), e.to_string())
            }
        }
    )*};
}

from_core!(
    McpError,
    EntropyError,
    HopfieldError,
    ReductionError,
    ConceptError,
    DatasetError
);

pub type CliResult<T> = Result<T, CliError>;
