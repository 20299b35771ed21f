use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Gamma has a pole at z = {0}")]
    GammaPole(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("multiplier band [{lo}, {hi}] is not covered by the frequency grid (max {max_frequency})")]
    BandViolation { lo: f64, hi: f64, max_frequency: f64 },

    #[error("|x - y| = {gap} is below the diagonal floor {floor}")]
    DiagonalFloor { gap: f64, floor: f64 },

    #[error("|b| = {b} exceeds the oscillatory quadrature ceiling {ceiling}")]
    QuadratureCeiling { b: f64, ceiling: f64 },

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("evaluation point {0} lies in the support of f")]
    SupportOverlap(f64),

    #[error("function is not supported inside the sampling window: {0}")]
    SupportNotContained(String),

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("degenerate sweep: {0}")]
    DegenerateSweep(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// Numerical failures (as opposed to rejected input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence(_) | Error::QuadratureCeiling { .. } | Error::GammaPole(_) | Error::CheckFailed(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
