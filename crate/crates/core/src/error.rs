use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum WormError {
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("non-polynomial coefficient: {0}")]
    NonPolynomial(String),
    #[error("operator has no definite parity")]
    MixedParity,
    #[error("integral did not converge: estimate {estimate} with error bound {error_bound}")]
    NotConverged { estimate: f64, error_bound: f64 },
    #[error("metric is not positive definite at {0}")]
    NotPositiveDefinite(String),
    #[error("metric is not symmetric: g[{0}][{1}] != g[{1}][{0}]")]
    Asymmetric(usize, usize),
    #[error("unexpected grading: {0}")]
    Grading(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("singular matrix")]
    Singular,
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = WormError> = std::result::Result<T, E>;
