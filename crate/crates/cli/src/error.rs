use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] esqpt_core::Error),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("plot dataset mismatch: {0}")]
    Plot(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("{failed} of {total} tasks failed")]
    PartialFailure { failed: usize, total: usize },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Coarse class used in the error record.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "validation",
            CliError::Core(esqpt_core::Error::InvalidInput(_)) => "validation",
            CliError::Core(_) => "compute",
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => "io",
            CliError::Plot(_) => "plot",
            CliError::OracleMismatch(_) => "oracle",
            CliError::PartialFailure { .. } => "partial",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "validation" => 2,
            "io" => 3,
            _ => 1,
        }
    }

    /// Machine-readable record written to stderr and to `error.json`.
    pub fn record(&self, subcommand: &str) -> Value {
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "subcommand": subcommand,
                "exit_code": self.exit_code(),
            }
        })
    }
}
