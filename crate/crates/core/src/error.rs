use thiserror::Error;

/// Errors raised by mesh construction, the finite element solves and the
/// spectral routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter is outside its admissible range.
    #[error("parameter `{name}` out of domain: {reason}")]
    ParameterDomain { name: &'static str, reason: String },

    /// Polygon input is not a simple counterclockwise polygon.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// Polygon input is simple but not convex.
    #[error("convexity required: {0}")]
    ConvexityRequired(String),

    /// A mesh violates one of its structural invariants.
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// The mesh text format could not be parsed.
    #[error("mesh format error at line {line}: {reason}")]
    MeshFormat { line: usize, reason: String },

    /// Factorization of an assembled operator failed.
    #[error("singular system: {0}")]
    Singular(String),

    /// More modes were requested than the discretization supports.
    #[error("capacity exceeded: requested {requested} modes, at most {available} available")]
    Capacity { requested: usize, available: usize },

    /// The iterative eigensolver did not converge; partial results are refused.
    #[error("eigensolver did not converge within {iterations} iterations (worst residual {residual:.3e})")]
    IterationLimit { iterations: usize, residual: f64 },

    /// A point lies outside the domain or too close to its boundary.
    #[error("point ({x}, {y}) is outside the admissible region: {reason}")]
    OutsideDomain { x: f64, y: f64, reason: String },

    /// A field failed a normalization precondition.
    #[error("normalization precondition failed: {0}")]
    Normalization(String),

    #[error("basis file error: {0}")]
    Basis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::ParameterDomain {
            name,
            reason: reason.into(),
        }
    }
}
