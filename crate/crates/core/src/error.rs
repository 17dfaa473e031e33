use thiserror::Error;

/// Errors raised by the geometry, calculus and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A curvature vector (or a matrix spectrum) left the positive cone.
    #[error("point outside the positive cone: entry {index} = {value}")]
    Domain { index: usize, value: f64 },

    /// Dimension or shape mismatch between two objects.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A speed function or problem was built from invalid parameters.
    #[error("invalid construction: {0}")]
    Construction(String),

    /// A speed-function spec string could not be parsed.
    #[error("cannot parse speed function spec {spec:?}: {reason}")]
    Parse { spec: String, reason: String },

    /// A discrete hypersurface failed the strict convexity test.
    #[error("convexity violated at node {node} (theta = {theta}): radii ({r1}, {r2})")]
    Convexity {
        node: usize,
        theta: f64,
        r1: f64,
        r2: f64,
    },

    /// Profile file could not be read or was malformed.
    #[error("profile format error on line {line}: {reason}")]
    Profile { line: usize, reason: String },

    /// An iterative solve ran out of iterations.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// A step could not be accepted even after repeated halving.
    #[error("step rejected after {halvings} halvings: {reason}")]
    StepRejected { halvings: usize, reason: String },

    /// The flow left the range where the discretisation is trustworthy.
    #[error("blow-up guard tripped: speed range {ratio:e}")]
    BlowUp { ratio: f64 },

    #[error("unsupported ambient for this operation: {0}")]
    Ambient(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
