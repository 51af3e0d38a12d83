use thiserror::Error;

/// Errors raised by the numerical-range toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumRangeError {
    #[error("matrix is not Hermitian (relative deviation {deviation:e})")]
    NonHermitianInput { deviation: f64 },

    #[error("Jacobi iteration did not converge within {sweeps} sweeps (off-diagonal mass {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("angle count {m} is below the minimum of {min}")]
    AngleCountTooSmall { m: usize, min: usize },

    #[error("point is not on the boundary (signed distance {distance:e})")]
    NotOnBoundary { distance: f64 },

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("subspace does not reduce the operator (residual {residual:e} exceeds {bound:e})")]
    NotReducing { residual: f64, bound: f64 },

    #[error("certified subspace exhausts the space; nothing left to deflate")]
    EmptyComplement,

    #[error("step {step}: operator not in standard position (Im <Tu,u> = {im:e})")]
    NotStandardPosition { step: usize, im: f64 },

    #[error("step {step}: {reason}")]
    SegmentViolation { step: usize, reason: String },

    #[error("invalid operator spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, NumRangeError>;
