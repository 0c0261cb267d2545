use std::path::PathBuf;

/// Failure categories of the lab crate. Each maps to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric error: {0}")]
    Numeric(ftp_core::Error),
    /// A verification ran to completion and found a violated property.
    #[error("check failed: {0}")]
    Check(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        LabError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// `2` configuration, `3` io, `4` parse or data, `5` numeric, `6` failed
    /// check.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) => 2,
            LabError::Io { .. } => 3,
            LabError::Parse { .. } | LabError::Data(_) => 4,
            LabError::Numeric(_) => 5,
            LabError::Check(_) => 6,
        }
    }

    /// Short tag printed in front of the message.
    pub fn category(&self) -> &'static str {
        match self {
            LabError::Config(_) => "config",
            LabError::Io { .. } => "io",
            LabError::Parse { .. } => "parse",
            LabError::Data(_) => "data",
            LabError::Numeric(_) => "numeric",
            LabError::Check(_) => "check",
        }
    }
}

impl From<ftp_core::Error> for LabError {
    fn from(e: ftp_core::Error) -> Self {
        match e {
            ftp_core::Error::Config(msg) => LabError::Config(msg),
            other => LabError::Numeric(other),
        }
    }
}
