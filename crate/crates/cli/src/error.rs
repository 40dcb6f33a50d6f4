use std::path::{Path, PathBuf};

/// Every failure a subcommand can report, with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] multiconf::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().to_owned(),
            source,
        }
    }

    /// 1 for bad input, 2 for a resource cap, 3 for non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(multiconf::Error::ResourceCap { .. }) => 2,
            CliError::Core(multiconf::Error::NonConvergence { .. }) => 3,
            _ => 1,
        }
    }
}
