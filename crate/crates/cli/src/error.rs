use std::fmt;
use std::path::Path;

use dpm_seq::DpmError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Input { line: usize, message: String },
    #[error("{0}")]
    Model(String),
    #[error(transparent)]
    Engine(#[from] DpmError),
}

impl CliError {
    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn input(line: usize, message: String) -> Self {
        Self::Input { line, message }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Io { .. } => "io",
            Self::Input { .. } => "input",
            Self::Model(_) => "model",
            Self::Engine(_) => "engine",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            _ => 1,
        }
    }

    /// Single-line `error kind=<kind> message="<text>"` form.
    pub fn machine_line(&self) -> String {
        let msg: String = self
            .to_string()
            .replace('\\', "\\\\")
            .replace('"', "\\\"")
            .replace('\n', " ");
        format!("error kind={} message=\"{}\"", self.kind(), msg)
    }
}
