use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("field is identically zero")]
    ZeroField,

    #[error("invalid CI data: {0}")]
    InvalidCi(String),

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("orbitals are not orthonormal (Gram deviation {deviation:.3e})")]
    NonOrthonormal { deviation: f64 },

    #[error("Gram matrix is (near) singular: smallest eigenvalue {eigenvalue:.3e}")]
    DegenerateGram { eigenvalue: f64 },

    #[error("occupation floor {requested} is infeasible: {reason}")]
    InfeasibleFloor { requested: f64, reason: String },

    #[error("inner problem is not concave (curvature {curvature:.3e}); light speed is subcritical")]
    SubcriticalLightSpeed { curvature: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("line search stalled at step {step:.3e}")]
    LineSearchStall { step: f64 },

    #[error("problem dimension {dimension} exceeds the limit {limit}")]
    DimensionGuard { dimension: usize, limit: usize },

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
