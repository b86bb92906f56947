use thiserror::Error;

/// Errors raised by the geometry engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value encountered while evaluating {what}")]
    NonFinite { what: String },

    #[error("metric is singular or not positive definite at the sampled point")]
    SingularMetric,

    #[error("invalid step size {0}; must be positive and finite")]
    InvalidStep(f64),

    #[error("no analytic {0} provider available for this chart")]
    MissingAnalytic(&'static str),

    #[error("almost-complex check failed: {0}")]
    NotAlmostComplex(String),

    #[error("almost contact frame invariant violated: {0}")]
    FrameViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("internal consistency check failed for {quantity}: path A = {path_a}, path B = {path_b}")]
    PathDisagreement {
        quantity: &'static str,
        path_a: f64,
        path_b: f64,
    },

    #[error("fiber violates statistical axioms: {0}")]
    FiberAxiomViolation(String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;
