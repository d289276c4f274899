use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("payoff {value} at index {index} outside [0, {ceiling}]")]
    PayoffOutOfRange { index: usize, value: f64, ceiling: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("not a probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("bandit log requires propensity reconstruction")]
    BanditLog,

    #[error("zero sampling probability for action {0}")]
    ZeroPropensity(usize),

    #[error("stationary solver did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("unknown mechanism `{0}`")]
    UnknownMechanism(String),

    #[error("not auditable: {0}")]
    NotAuditable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
