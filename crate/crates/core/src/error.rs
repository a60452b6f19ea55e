use thiserror::Error;

/// Errors raised by graph construction, curvature, metric and semigroup routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid json input: {0}")]
    Json(String),

    #[error("negative or non-finite weight {weight} on edge ({u}, {v})")]
    InvalidWeight { u: String, v: String, weight: f64 },

    #[error("conflicting weights for edge ({u}, {v}): {first} vs {second}")]
    ConflictingEdge {
        u: String,
        v: String,
        first: f64,
        second: f64,
    },

    #[error("self-loop at vertex {0}")]
    SelfLoop(String),

    #[error("vertex {vertex} has non-positive measure {measure}")]
    NonPositiveMeasure { vertex: String, measure: f64 },

    #[error("unknown vertex {0}")]
    UnknownVertex(String),

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("graph has no edges")]
    EdgelessGraph,

    #[error("graph is disconnected")]
    Disconnected,

    #[error("empty vertex set")]
    EmptySet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "solver did not converge after {iterations} iterations (lower {lower}, upper {upper})"
    )]
    NonConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
