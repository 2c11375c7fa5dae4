use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tangent vector is not based at the given point")]
    BaseMismatch,

    #[error("invalid manifold: {0}")]
    InvalidManifold(String),

    #[error("no unique minimizing geodesic between antipodal points")]
    AntipodalPoints,

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("jacobian is near singular (condition estimate {condition:.3e})")]
    NearSingularJacobian { condition: f64 },

    #[error("constraint {index} is not strictly positive ({value:e})")]
    NonpositiveConstraint { index: usize, value: f64 },

    #[error("point is not strictly feasible: {0}")]
    NotStrictlyFeasible(String),

    #[error("inner iteration stalled: {0}")]
    InnerStalled(String),

    #[error("trust-region step is not interior (|d| = {norm:e}, radius = {radius:e})")]
    NotInterior { norm: f64, radius: f64 },

    #[error("point is not approximately KKT (residual {residual:e})")]
    NotApproximatelyKkt { residual: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("equality constraints are not supported by this solver")]
    EqualityConstraintsUnsupported,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("problem file: {0}")]
    ProblemFile(String),

    #[error("trace file: {0}")]
    Trace(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
