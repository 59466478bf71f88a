use thiserror::Error;

/// Errors raised by the kernel, the decomposition, chart evaluation and the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variable index {index} out of range for {nvars} variable(s)")]
    InvalidVariable { index: usize, nvars: usize },
    #[error("zero polynomial not allowed: {0}")]
    ZeroPolynomial(String),
    #[error("both polynomials vanish identically in variable x{}", .0 + 1)]
    BothZero(usize),
    #[error("endpoint {0} is a root; perturb or refine the interval")]
    EndpointRoot(String),
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate cell: {0}")]
    DegenerateCell(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("singular branch: {0}")]
    Singular(String),
    #[error("point outside domain: {0}")]
    OutsideDomain(String),
    #[error("value is not an exact rational")]
    NotExact,
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error("norm estimate did not converge: {0}")]
    NonConvergent(String),
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("step failed on {slice}: {msg}")]
    StepFailed { slice: String, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
