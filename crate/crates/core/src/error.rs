use thiserror::Error;

/// Errors raised by the scattering library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("scene contains no obstacles")]
    EmptyScene,

    #[error("obstacles {first} and {second} overlap or touch (gap {gap:.3e})")]
    Overlap { first: usize, second: usize, gap: f64 },

    #[error("invalid obstacle {id}: {reason}")]
    InvalidObstacle { id: usize, reason: String },

    #[error("point is off the surface of obstacle {id} (residual {residual:.3e})")]
    OffSurface { id: usize, residual: f64 },

    #[error("resource cap exceeded: {what} ({requested} > {cap})")]
    Resource {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("matrix I + sA is numerically singular (condition {condition:.3e})")]
    Singular { condition: f64 },

    #[error("grazing reflection: |<zeta, eta>| = {cosine:.3e}")]
    Tangency { cosine: f64 },

    #[error("Newton iteration did not converge (residual {residual:.3e})")]
    NoConvergence { residual: f64 },

    #[error("stationary point violates illumination signs at node {node}")]
    SignViolation { node: usize },

    #[error("node {node} is a {found} point, {expected} was requested")]
    PathTypeMismatch {
        node: usize,
        found: &'static str,
        expected: &'static str,
    },

    #[error("target {target:?} is near the caustic set: {reason}")]
    Caustic { target: [f64; 3], reason: String },

    #[error("target {target:?} lies within {distance:.3e} of the boundary (minimum {minimum:.3e})")]
    NearBoundary {
        target: [f64; 3],
        distance: f64,
        minimum: f64,
    },

    #[error("target {target:?} lies inside obstacle {id}")]
    InsideObstacle { target: [f64; 3], id: usize },

    #[error("series did not converge: last term {last:.3e} vs partial sum {sum:.3e}")]
    Convergence { last: f64, sum: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable name used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyScene => "EmptySceneError",
            Error::Overlap { .. } => "OverlapError",
            Error::InvalidObstacle { .. } => "InvalidObstacleError",
            Error::OffSurface { .. } => "OffSurfaceError",
            Error::Resource { .. } => "ResourceError",
            Error::Singular { .. } => "SingularError",
            Error::Tangency { .. } => "TangencyError",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SignViolation { .. } => "SignViolation",
            Error::PathTypeMismatch { .. } => "PathTypeMismatch",
            Error::Caustic { .. } => "CausticError",
            Error::NearBoundary { .. } => "NearBoundaryError",
            Error::InsideObstacle { .. } => "InsideObstacleError",
            Error::Convergence { .. } => "ConvergenceError",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
