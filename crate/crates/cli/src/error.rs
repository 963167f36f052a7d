use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rashomon_core::Error),
    #[error("run directory {0} is missing or lacks detect output")]
    MissingRunDirectory(PathBuf),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::MissingRunDirectory(_) => "MissingRunDirectory",
            CliError::Usage(_) => "Usage",
            CliError::File { .. } => "Io",
            CliError::Config { .. } => "InvalidConfig",
            CliError::Csv(_) => "Csv",
            CliError::Json(_) => "Json",
        }
    }

    /// 2 for problems with the user's inputs, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        let user = match self {
            CliError::Core(e) => e.is_user_error(),
            CliError::MissingRunDirectory(_)
            | CliError::Usage(_)
            | CliError::File { .. }
            | CliError::Config { .. } => true,
            CliError::Csv(_) | CliError::Json(_) => false,
        };
        if user {
            2
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Payload<'a> {
            error: &'a str,
            message: String,
            exit_code: i32,
        }
        serde_json::to_string(&Payload {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        })
        .expect("plain struct serializes")
    }
}
