use std::path::{Path, PathBuf};

use dars_core::oracle::OracleError;
use dars_core::sim::SimError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{}: {message}", path.display())]
    Schema { path: PathBuf, message: String },
    #[error("override: {0}")]
    Override(String),
    #[error("sweep: {0}")]
    Sweep(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Usage(String),
}

/// One-line JSON error report written to stderr.
#[derive(Debug, Serialize)]
struct Report<'a> {
    error: &'a str,
    message: String,
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// Syntax or schema error located by its byte span in `text`.
    pub fn parse(path: &Path, text: &str, err: &toml::de::Error) -> Self {
        let message = err.message().trim().to_string();
        match err.span() {
            Some(span) => {
                let before = &text[..span.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                CliError::Parse { path: path.to_path_buf(), line, column, message }
            }
            None => CliError::Schema { path: path.to_path_buf(), message },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Schema { .. } => "schema",
            CliError::Override(_) => "override",
            CliError::Sweep(_) => "sweep",
            CliError::Sim(_) => "simulation",
            CliError::Oracle(OracleError::SizeLimit { .. }) => "size_limit",
            CliError::Oracle(_) => "oracle",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. }
            | CliError::Schema { .. }
            | CliError::Override(_)
            | CliError::Sweep(_)
            | CliError::Usage(_) => 2,
            CliError::Oracle(OracleError::SizeLimit { .. }) => 3,
            CliError::Sim(_) | CliError::Oracle(_) => 4,
            CliError::Io { .. } => 5,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&Report { error: self.kind(), message: self.to_string() }).expect("report serializes")
    }
}
