use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

/// Errors surfaced by the formats, experiments and CLI layers.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Domain(#[from] klbandit_core::Error),
    #[error("{what}: {detail} at line {line}, column {column}")]
    Parse { what: &'static str, line: usize, column: usize, detail: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        AppError::Io { path: path.as_ref().to_path_buf(), source }
    }

    pub fn parse(what: &'static str, line: usize, column: usize, detail: impl fmt::Display) -> Self {
        AppError::Parse { what, line, column, detail: detail.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Domain(e) => e.kind(),
            AppError::Parse { .. } => "ParseError",
            AppError::Io { .. } => "IoError",
            AppError::Usage(_) => "UsageError",
        }
    }

    /// Process exit status: 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// Single-line `error.kind=<..> error.detail=<..>` record.
    pub fn record(&self) -> String {
        let detail = self.to_string().replace(['\n', '\r'], " ");
        format!("error.kind={} error.detail={}", self.kind(), detail)
    }
}
