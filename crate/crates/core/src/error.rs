use thiserror::Error;

/// Errors raised by the geometry, analysis and sampling routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("direction is undefined at the zero vector")]
    UndefinedDirection,

    #[error("norm derivative is singular at {point:?} (coordinate axis for exponent p = {p})")]
    SingularPoint { p: f64, point: Vec<f64> },

    #[error("dual-norm maximizer did not converge (residual {residual:e})")]
    Solver { residual: f64 },

    #[error("input is not even under antipodal reflection (odd-mode magnitude {max_odd:e})")]
    NotEven { max_odd: f64 },

    #[error("line lies on the boundary of the (r, Theta) chart (Theta = {theta}, Omega = {omega})")]
    ChartBoundary { theta: f64, omega: f64 },

    #[error("planes are parallel or coincident; their intersection is not a line")]
    DegenerateIntersection,

    #[error("direction is not F-unit: F(xi) = {value}")]
    NotUnit { value: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("polygon is self-intersecting (edges {first} and {second})")]
    SelfIntersecting { first: usize, second: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
