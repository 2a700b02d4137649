use std::fmt::Display;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const RESOURCE: i32 = 3;
    pub const REFUTATION: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{at}: {message}")]
    Invalid { at: String, message: String },
    #[error("system fails validation: {0}")]
    Validation(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] dixmier_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(at: &str, message: impl Display) -> Self {
        Error::Invalid {
            at: at.to_owned(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Invalid { .. } | Error::Validation(_) => exit::VALIDATION,
            Error::Core(dixmier_core::Error::Resource { .. }) => exit::RESOURCE,
            _ => exit::FAILURE,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
