use thiserror::Error;

#[derive(Debug, Error)]
pub enum TomoError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("protocol is not complete: sum of intensity operators is not proportional to identity")]
    IncompleteProtocol,

    #[error("protocol exposures have not been assigned")]
    UnassignedExposures,

    #[error("tensor dimension {dimension} exceeds cap {cap}")]
    DimensionCap { dimension: usize, cap: usize },

    #[error("row index {index} out of range for protocol with {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },

    #[error("state has symmetric-subspace weight {0:.3e}; cannot project")]
    NotSymmetric(f64),

    #[error("degenerate precision model: expected {expected} nonzero coefficients, found {found}")]
    DegeneratePrecisionModel { expected: usize, found: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TomoError {
    /// Process exit code used by the CLI: 2 for configuration problems, 3 for
    /// everything that fails during computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            TomoError::Config(_) | TomoError::InvalidArgument(_) | TomoError::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, TomoError>;
