use std::io;
use std::path::Path;

use pathpair::dsl::ParseDiagnostic;
use thiserror::Error;

/// Failure of a command, carrying its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, missing or malformed input files: exit 2.
    #[error("error: {0}")]
    User(String),

    /// Positioned scheme diagnostics: exit 2.
    #[error("{}", list_diagnostics(.origin, .diagnostics))]
    Diagnostics {
        origin: String,
        diagnostics: Vec<ParseDiagnostic>,
    },

    /// Unreadable files, failed writes: exit 3.
    #[error("error: {0}")]
    Environment(String),
}

fn list_diagnostics(origin: &str, diagnostics: &[ParseDiagnostic]) -> String {
    diagnostics
        .iter()
        .map(|d| format!("{origin}:{d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    pub fn user(msg: impl Into<String>) -> Self {
        CliError::User(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) | CliError::Diagnostics { .. } => 2,
            CliError::Environment(_) => 3,
        }
    }

    /// Missing files are the caller's mistake; other read failures are not.
    pub fn from_read(path: &Path, err: io::Error) -> Self {
        match err.kind() {
            io::ErrorKind::NotFound => {
                CliError::User(format!("file not found: {}", path.display()))
            }
            _ => CliError::Environment(format!("cannot read {}: {err}", path.display())),
        }
    }
}

impl From<pathpair::Error> for CliError {
    fn from(e: pathpair::Error) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Environment(format!("write failed: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Environment(format!("write failed: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Environment(format!("serialization failed: {e}"))
    }
}
