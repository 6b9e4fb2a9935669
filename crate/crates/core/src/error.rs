use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("not Hermitian (asymmetry {residual:.3e} exceeds {limit:.3e})")]
    NotHermitian { residual: f64, limit: f64 },

    #[error("not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NegativeEigenvalue { min_eigenvalue: f64 },

    #[error("not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("support of the first component is not contained in the support of the second (residual {residual:.3e})")]
    SupportViolation { residual: f64 },

    #[error("first component vanishes while the second does not")]
    ZeroRhoNonzeroSigma,

    #[error("operation requires a nonzero dichotomy")]
    ZeroDichotomy,

    #[error("invalid dichotomy: {0}")]
    InvalidDichotomy(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("alpha must lie in {{0}} ∪ [1, ∞]: got {0}")]
    InvalidAlpha(f64),

    #[error("first component must have unit trace (got {0})")]
    NotNormalized(f64),

    #[error("solver guard exceeded: {0}")]
    SolverGuardExceeded(String),

    #[error("objective diverges")]
    DivergentObjective,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
