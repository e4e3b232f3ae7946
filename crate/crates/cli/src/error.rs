use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] recalib::Error),

    #[error("{0}")]
    Ingest(String),

    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn ingest(msg: impl Into<String>) -> Self {
        CliError::Ingest(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 I/O, 2 input, 3 numerical, 4 resource.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(e) if e.is_resource() => 4,
            CliError::Core(_) | CliError::Ingest(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}
