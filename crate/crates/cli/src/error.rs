use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}:{line}: unknown config key `{key}`")]
    UnknownKey { path: PathBuf, line: usize, key: String },
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: PathBuf, line: usize },
    #[error("{path}:{line}: key `{key}` given twice")]
    Duplicate { path: PathBuf, line: usize, key: String },
    #[error("config key `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("{0}")]
    Config(String),
    #[error("checkpoint mismatch: {0}")]
    CheckpointMismatch(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] kicked_duo::Error),
}

impl HarnessError {
    pub fn bad(key: &str, reason: impl Into<String>) -> Self {
        Self::BadValue { key: key.to_string(), reason: reason.into() }
    }

    pub fn file(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::File { path, source }
    }

    /// 2 for bad input, 3 for the aliasing guard, 130 when interrupted.
    pub fn exit_code(&self) -> i32 {
        use kicked_duo::Error as E;
        match self {
            Self::Model(E::Aliasing { .. }) => 3,
            Self::Model(E::Interrupted { .. }) => 130,
            Self::Model(E::InvalidParam { .. })
            | Self::Model(E::Misaligned { .. })
            | Self::Model(E::DegenerateWindow { .. })
            | Self::Model(E::BadBin(_)) => 2,
            Self::Model(_) | Self::File { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
