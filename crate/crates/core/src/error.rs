use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Fock dimension {0}: need at least 2 levels")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("drive order k={0} is not supported (only k=1 and k=2)")]
    UnsupportedDrive(u32),

    #[error("the Lindblad family requires theta = pi/4, got theta = {0}")]
    LindbladAngle(f64),

    #[error("trace drift {drift:.3e} at t = {t} exceeds tolerance even after step refinement")]
    StepSize { t: f64, drift: f64 },

    #[error("non-finite entries encountered at t = {0}")]
    Instability(f64),

    #[error("population distribution is not decaying (slope {0}); no effective temperature")]
    NoTemperature(f64),

    #[error("not enough populated levels for a fit: {found} < {needed}")]
    TooFewLevels { found: usize, needed: usize },

    #[error("unit eigenvalue of the one-period map is degenerate (second singular value {0:.3e})")]
    AmbiguousFixedPoint(f64),

    #[error("continuation produced no fixed points")]
    EmptyBranch,
}

pub type Result<T> = std::result::Result<T, Error>;
