use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] iontrap_mbqc::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 1 for bad input, 2 when the physics or a verification fails.
    pub fn exit_code(&self) -> i32 {
        use iontrap_mbqc::Error as E;
        match self {
            Self::Verification(_) => 2,
            Self::Core(E::ScheduleInfeasible(_) | E::SingularResonance | E::UndefinedRatio) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
