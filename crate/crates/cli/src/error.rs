use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
/// A verification check failed, or a result could not be computed.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Compute(#[from] thermoline_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use thermoline_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Compute(E::Domain { .. } | E::UnsupportedOrder { .. } | E::Config(_)) => {
                EXIT_USAGE
            }
            CliError::Compute(_) => EXIT_FAILURE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
