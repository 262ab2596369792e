use std::fmt;

use egd_core::bitcodec::CodecError;
use egd_core::gede::GedeError;
use egd_core::imgpipe::ImgError;
use egd_core::mltrain::MlError;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Schema = 2,
    Io = 3,
    Precondition = 4,
    Numeric = 5,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        Self { exit, message: message.into() }
    }

    pub fn schema(message: impl Into<String>) -> Self {
        Self::new(Exit::Schema, message)
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::new(Exit::Io, format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(Exit::Io, e.to_string())
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::Io(io) => io.into(),
            other => Self::schema(other.to_string()),
        }
    }
}

impl From<GedeError> for CliError {
    fn from(e: GedeError) -> Self {
        match e {
            GedeError::Io(io) => io.into(),
            GedeError::Codec(c) => c.into(),
            GedeError::NoCondensedData => Self::new(Exit::Precondition, e.to_string()),
            other => Self::schema(other.to_string()),
        }
    }
}

impl From<MlError> for CliError {
    fn from(e: MlError) -> Self {
        match e {
            MlError::NonFinite { .. } | MlError::SingularSystem(_) => Self::new(Exit::Numeric, e.to_string()),
            other => Self::schema(other.to_string()),
        }
    }
}

impl From<ImgError> for CliError {
    fn from(e: ImgError) -> Self {
        match e {
            ImgError::Io(io) => io.into(),
            ImgError::Gede(g) => g.into(),
            ImgError::Codec(c) => c.into(),
            other => Self::schema(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::new(Exit::Io, e.to_string())
    }
}
