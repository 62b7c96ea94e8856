//! Error taxonomy of the runner, mapped to process exit codes.

use thiserror::Error;

/// Anything that aborts a run. Checks that complete but fail (a property
/// suite finding violations, an invalid space) are not errors; they are
/// reported through [`crate::commands::Outcome`] and exit with code 1.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unusable configuration or flags (exit 2).
    #[error("configuration: {0}")]
    Config(String),

    /// The engine refused or failed numerically (exit 3).
    #[error("numerical: {0}")]
    Numerical(#[from] modent_core::Error),

    /// Filesystem trouble while reading configs or writing artifacts
    /// (exit 4).
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Config(err.to_string())
    }
}
