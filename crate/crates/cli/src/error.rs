use std::path::Path;

use serde::Serialize;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] dimer_core::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: err.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(ConfigError::Parse { .. }) => "parse_error",
            CliError::Config(ConfigError::Validation { .. }) => "validation_error",
            CliError::Core(_) => "numerical_error",
            CliError::Io { .. } => "io_error",
            CliError::Usage(_) => "usage_error",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }

    /// One-line JSON record of the error.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            line: Option<usize>,
            #[serde(skip_serializing_if = "Option::is_none")]
            key: Option<&'a str>,
        }
        let (line, key) = match self {
            CliError::Config(ConfigError::Parse { line, .. }) => (Some(*line), None),
            CliError::Config(ConfigError::Validation { key, .. }) => (None, Some(key.as_str())),
            _ => (None, None),
        };
        serde_json::to_string(&Record { error: self.kind(), message: self.to_string(), line, key }).expect("plain data serializes")
    }
}
