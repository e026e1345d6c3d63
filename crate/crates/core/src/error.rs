use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("invalid point at sample index {index}: {reason}")]
    InvalidPoint { index: usize, reason: String },

    #[error("axis {axis} out of range for width {width}")]
    AxisOutOfRange { axis: usize, width: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("empty family")]
    EmptyFamily,

    #[error("not enumerable: {0}")]
    NotEnumerable(String),

    #[error("family too large: {what} exceeds cap {cap}")]
    FamilyTooLarge { what: String, cap: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("covariance not positive definite")]
    NotPositiveDefinite,

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("mismatched supports: {0} vs {1}")]
    MismatchedSupport(usize, usize),

    #[error("insufficient sample: need {needed}, got {got}")]
    InsufficientSample { needed: usize, got: usize },

    #[error("trace not represented")]
    TraceNotRepresented,

    #[error("method inapplicable: {0}")]
    MethodInapplicable(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown scenario: {0}")]
    UnknownScenario(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(msg: impl Into<String>) -> Error {
    Error::OutOfRange(msg.into())
}
