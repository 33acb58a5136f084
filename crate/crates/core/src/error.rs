use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("logit {value} exceeds the overflow cap of {cap}")]
    LogitOverflow { value: f64, cap: f64 },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("no exact map registered under id `{0}`")]
    UnknownExactMap(String),
    #[error("exact map id `{0}` is already registered")]
    DuplicateExactMap(String),
    #[error("exact integer arithmetic would overflow: {0}")]
    ExactOverflow(String),
    #[error("node {0} has degree zero")]
    ZeroDegree(usize),
    #[error("singular gram matrix for support of size {0}")]
    SingularGram(usize),
    #[error("embedding margins failed after {attempts} samples")]
    MarginFailure { attempts: usize },
    #[error("rejection sampling exhausted after {0} attempts")]
    RejectionExhausted(usize),
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error("unknown construction `{0}`")]
    UnknownConstruction(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
