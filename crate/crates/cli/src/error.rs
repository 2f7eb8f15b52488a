use std::path::PathBuf;

use serde_json::json;
use waves_core::WaveError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] WaveError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("verification failed: criteria {0:?}")]
    Verification(Vec<u8>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver(_) | CliError::Io { .. } => 3,
            CliError::Verification(_) => 4,
        }
    }

    /// Machine-readable diagnostic for the error stream.
    pub fn diagnostic(&self) -> String {
        let kind = match self {
            CliError::Usage(_) => "usage",
            CliError::Solver(_) => "solver",
            CliError::Io { .. } => "io",
            CliError::Verification(_) => "verification",
        };
        let mut value = json!({ "error": kind, "message": self.to_string() });
        if let CliError::Solver(e) = self {
            value["detail"] = json!(format!("{e:?}"));
        }
        value.to_string()
    }
}
