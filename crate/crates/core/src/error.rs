use crate::trajectory::Trajectory;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown identifier `{name}` at line {line}, column {column}")]
    UnknownIdentifier { name: String, line: usize, column: usize },

    #[error("variable x{index} out of range for dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("evaluation domain error: {0}")]
    Domain(String),

    #[error("gradient too small: |grad V| = {norm:e} <= {threshold:e}")]
    GradientTooSmall { norm: f64, threshold: f64 },

    #[error("solver diverged after {iterations} iterations (residual {residual:e})")]
    SolverDivergence { iterations: usize, residual: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("unknown system `{name}`; available: {}", available.join(", "))]
    UnknownSystem { name: String, available: Vec<&'static str> },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("tensor of dimension {dim} and order {order} exceeds the dense budget")]
    TensorBudget { dim: usize, order: usize },

    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("integration aborted at step {step}: {source}")]
    Aborted {
        step: usize,
        partial: Box<Trajectory>,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True if this error (or the error that aborted an integration) is a
    /// nonlinear-solver failure.
    pub fn is_divergence(&self) -> bool {
        match self {
            Error::SolverDivergence { .. } => true,
            Error::Aborted { source, .. } => source.is_divergence(),
            _ => false,
        }
    }
}
