use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unbounded: {0}")]
    Unbounded(String),
    #[error("inclusion violated at {point:?} (gauge {gauge})")]
    InclusionViolated { point: Vec<f64>, gauge: f64 },
    #[error("mu[{index}] = {mu} outside window [{lo}, {hi}]")]
    OutsideWindow { index: usize, mu: f64, lo: f64, hi: f64 },
    #[error("support {support} cannot be reduced to cap {cap}")]
    ReductionInfeasible { support: usize, cap: usize },
    #[error("malformed input: {0}")]
    Format(String),
    #[error("solver error: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
