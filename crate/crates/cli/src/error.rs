use std::io;
use std::path::PathBuf;

use cvoa::EvalError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("run with seed {seed} failed: {source}")]
    Evaluation {
        seed: u64,
        #[source]
        source: EvalError,
    },
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Evaluation { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }
}
