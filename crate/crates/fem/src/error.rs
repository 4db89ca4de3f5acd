use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("triangle {element} is degenerate (signed area {area:e})")]
    DegenerateTriangle { element: usize, area: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Core(#[from] accreg_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FemError>;

pub(crate) fn invalid(msg: impl Into<String>) -> FemError {
    FemError::InvalidArgument(msg.into())
}

impl From<FemError> for accreg_core::Error {
    fn from(e: FemError) -> Self {
        match e {
            FemError::Core(inner) => inner,
            other => accreg_core::Error::Backend(other.to_string()),
        }
    }
}
