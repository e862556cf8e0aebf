use serde::Serialize;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] hyperstab::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Machine-readable error written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub status: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(_) => 3,
        }
    }

    pub fn report(&self) -> ErrorReport {
        let kind = if self.exit_code() == 2 { "validation" } else { "numerical" };
        ErrorReport { status: self.exit_code(), kind, message: self.to_string() }
    }
}
