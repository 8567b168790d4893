use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("measure space must contain at least one atom")]
    EmptySpace,

    #[error("nonpositive weight at index {index} (value {value})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not self-adjoint in the weighted inner product (relative asymmetry {asymmetry:.3e})")]
    NotSelfAdjoint { asymmetry: f64 },

    #[error("operator has a negative eigenvalue {eigenvalue:.6e} beyond roundoff")]
    NotNonnegative { eigenvalue: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("problem size {size} exceeds the dense limit {limit}; use the separable block path (manifolds::BlockSpectrum) instead")]
    TooLarge { size: usize, limit: usize },

    #[error("spectral function is not finite at eigenvalue {eigenvalue:.6e}")]
    NonFiniteSpectralFunction { eigenvalue: f64 },

    #[error("vector has {residual:.3e} relative energy outside the materialized angular modes")]
    UnresolvedModes { residual: f64 },

    #[error("oscillation scale {epsilon} is not resolved: needs radial spacing <= {required_spacing:.6e}, grid has {spacing:.6e}")]
    Unresolved { epsilon: f64, spacing: f64, required_spacing: f64 },

    #[error("invalid {name}: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument { name, reason: reason.into() }
    }
}
