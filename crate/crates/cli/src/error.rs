use std::fmt;

use thiserror::Error;

/// Error category; each maps to a fixed process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Validation,
    Io,
    Numerical,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Validation => 1,
            Kind::Io => 2,
            Kind::Numerical => 3,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Validation => "validation",
            Kind::Io => "io",
            Kind::Numerical => "numerical",
        })
    }
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Validation,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Io,
            message: message.into(),
        }
    }
}

impl From<lengthwise::Error> for CliError {
    fn from(e: lengthwise::Error) -> Self {
        let kind = match e {
            lengthwise::Error::NonFinite { .. } => Kind::Numerical,
            _ => Kind::Validation,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
