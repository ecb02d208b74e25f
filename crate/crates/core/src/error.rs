use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("input is not transverse: relative divergence {residual:e} exceeds {threshold:e}")]
    NonTransverse { residual: f64, threshold: f64 },

    #[error("input carries content outside the resolved mode band (dc or Nyquist): relative weight {relative:e}")]
    UnresolvedContent { relative: f64 },

    #[error("CFL violation: c*dt = {cdt:e} exceeds the limit h/sqrt(3) = {limit:e}")]
    Cfl { cdt: f64, limit: f64 },

    #[error("singular sample at index {index}: r = {r}, sin(theta) = {sin_theta}")]
    SingularPoint { index: usize, r: f64, sin_theta: f64 },

    #[error("rejected sample {index}: {reason}")]
    RejectedSample { index: usize, reason: &'static str },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("functional evaluation failed: {0}")]
    EvaluationFailure(String),

    #[error("algebra violation: {0}")]
    AlgebraViolation(String),

    #[error("electric sources must be absent in a magnetic-world run")]
    ElectricSourcePresent,

    #[error("source continuity violated: electric {ce:e}, magnetic {cm:e}, tolerance {tolerance:e}")]
    ContinuityViolation { ce: f64, cm: f64, tolerance: f64 },

    #[error("div E reached {residual:e}, above {threshold:e}, in a magnetic-world run")]
    ElectricDivergence { residual: f64, threshold: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
