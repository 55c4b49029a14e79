use thiserror::Error;

/// Errors raised by the library. Variants carry enough context to locate the
/// offending node, sample or parameter.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("non-finite operator value {value} at x={x:?}, r={r}, p={p:?}")]
    Evaluation {
        x: Vec<f64>,
        r: f64,
        p: Vec<f64>,
        value: f64,
    },

    #[error("matrix is not positive semidefinite at x={x:?} (min eigenvalue {min_eig})")]
    NotPsd { x: Vec<f64>, min_eig: f64 },

    #[error("scheme is not monotone at node {node} (direction {direction}): {detail}")]
    NotMonotone {
        node: usize,
        direction: String,
        detail: String,
    },

    #[error("iteration diverged; residual trace tail {trace:?}")]
    Divergence { trace: Vec<f64> },

    #[error("precondition violated at node {node}: {detail}")]
    Precondition { node: usize, detail: String },

    #[error("barrier inequality ({index}) violated: {detail}")]
    Barrier { index: &'static str, detail: String },

    #[error("time step {dt} exceeds the stability bound {bound}")]
    Cfl { dt: f64, bound: f64 },

    #[error("maximizer is not unique at node {node}: {count} candidates")]
    NonUnique { node: usize, count: usize },

    #[error("stabilization failed: {0}")]
    Stabilization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
