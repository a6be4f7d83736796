use std::path::{Path, PathBuf};

/// Failures surfaced by the experiment layer. Each maps to a stable exit
/// code, see [`AppError::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("simulation failed: {0}")]
    Sim(#[from] hbfsm_core::Error),
}

impl AppError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn config(key: &str, message: impl Into<String>) -> Self {
        Self::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// 1 for IO, 2 for config parsing or validation, 3 for a failed run.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io { .. } => 1,
            Self::Parse(_) | Self::Config { .. } => 2,
            Self::Sim(_) => 3,
        }
    }
}
