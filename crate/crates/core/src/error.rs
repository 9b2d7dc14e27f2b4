use thiserror::Error;

/// Errors raised by validation, numerics and the command line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("metric not symmetric (max |g - g^T| = {0:.3e})")]
    MetricNotSymmetric(f64),
    #[error("metric index != 1 (found {0} negative eigenvalues)")]
    MetricIndex(usize),
    #[error("metric is degenerate")]
    MetricDegenerate,
    #[error("T is not invertible")]
    MonodromyNotInvertible,
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integrator accuracy: {0}")]
    IntegratorAccuracy(String),
    #[error("nonconvergent: {0}")]
    Nonconvergent(String),
    #[error("identity violation: {0}")]
    IdentityViolation(String),
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
    #[error("problem file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
