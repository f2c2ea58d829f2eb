use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("arity mismatch for `{name}` at offset {offset}: {message}")]
    Arity {
        name: String,
        offset: usize,
        message: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("singular metric (condition number {condition:e})")]
    SingularMetric { condition: f64 },

    #[error("metric not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("point too close to the domain boundary along coordinate {axis} for the finite-difference stencil")]
    StencilOutOfDomain { axis: usize },

    #[error("point outside domain along coordinate {axis}")]
    OutsideDomain { axis: usize },

    #[error("vectors not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("invalid tuple: {0}")]
    InvalidTuple(String),

    #[error("immersion rank deficient (smallest singular value {sigma:e})")]
    RankDeficient { sigma: f64 },

    #[error("dimension {dim} exceeds the enumeration cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
