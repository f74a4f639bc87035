use std::path::PathBuf;

use thiserror::Error;

/// Exit code of a successful run.
pub const EXIT_OK: i32 = 0;
/// I/O and other unexpected failures.
pub const EXIT_OTHER: i32 = 1;
/// Malformed input files.
pub const EXIT_PARSE: i32 = 2;
/// Enumeration or completion caps.
pub const EXIT_CAP: i32 = 3;
/// The MLE fit did not converge or is inconsistent with the data.
pub const EXIT_NO_CONVERGENCE: i32 = 4;
/// Bad flags or inconsistent model arguments.
pub const EXIT_CONFIG: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mbasis::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    InputParse { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        use mbasis::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Parse { .. } => EXIT_PARSE,
                E::EnumerationCap { .. } | E::CompletionOverflow { .. } => EXIT_CAP,
                E::NotConverged { .. } | E::InconsistentFit { .. } => EXIT_NO_CONVERGENCE,
                E::Config(_)
                | E::ModelInvalid(_)
                | E::InvalidDimension(_)
                | E::DimensionMismatch { .. }
                | E::InvalidTable(_)
                | E::InvalidGraph(_)
                | E::UnboundedFiber { .. } => EXIT_CONFIG,
                E::Overflow(_) => EXIT_OTHER,
            },
            CliError::Io { .. } => EXIT_OTHER,
            CliError::InputParse { .. } => EXIT_PARSE,
            CliError::Usage(_) => EXIT_CONFIG,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
