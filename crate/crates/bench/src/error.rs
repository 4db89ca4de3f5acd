use std::fmt::Display;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] accreg_core::Error),
    #[error(transparent)]
    Fem(#[from] accreg_fem::FemError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, BenchError>;

pub(crate) fn config_err(field: &str, message: impl Display) -> BenchError {
    BenchError::Config(format!("{field}: {message}"))
}

impl BenchError {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Config(_) => 2,
            _ => 1,
        }
    }
}
