use std::process::ExitCode;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numeric(String),
}

#[derive(Serialize)]
struct Payload<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct Envelope<'a> {
    error: Payload<'a>,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
            CliError::Numeric(_) => "numeric",
        }
    }

    /// 2 for bad input, 3 for failures while running.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Parse(_) | CliError::Validation(_) => ExitCode::from(2),
            CliError::Io(_) | CliError::Numeric(_) => ExitCode::from(3),
        }
    }

    /// One-line JSON object for standard error.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&Envelope {
            error: Payload {
                kind: self.kind(),
                message: self.to_string(),
            },
        })
        .expect("plain strings serialize")
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
