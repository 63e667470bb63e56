use std::io;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("malformed {}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Core(#[from] cqed_core::Error),
}

impl CliError {
    /// 2 for bad inputs, 3 for numerical failures, 1 for I/O on output.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } | CliError::Read { .. } | CliError::Json { .. } => 2,
            CliError::Core(e) if e.is_config() => 2,
            CliError::Core(_) => 3,
            CliError::Write { .. } => 1,
        }
    }
}
