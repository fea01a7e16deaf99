use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("multisets live in different spaces")]
    SpaceMismatch,

    #[error("norm {0} has no exact assignment solver at combined rank {1}")]
    UnsupportedNorm(String, usize),

    #[error("brute force limited to combined rank 8, got {0}")]
    SizeLimit(usize),

    #[error("containment violated: {0}")]
    Containment(String),

    #[error("point {0} lies in the compact set")]
    Domain(String),

    #[error("ambiguous boundary point: {a} and {b} are equidistant")]
    Ambiguous { a: f64, b: f64 },

    #[error("angle {theta} coincides with an endpoint eigenvalue at {angle}")]
    ThetaCollision { theta: f64, angle: f64 },

    #[error("sampling too coarse at step {index}: {reason}")]
    Resolution { index: usize, reason: String },

    #[error("winding residual {0} exceeds 0.05")]
    Consistency(f64),

    #[error("matrix is not normal (commutator norm {0:e})")]
    NotNormal(f64),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
