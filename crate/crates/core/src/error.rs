use thiserror::Error;

/// Errors raised by constructors and operations of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval ({left}, {right}): {reason}")]
    InvalidInterval {
        left: f64,
        right: f64,
        reason: &'static str,
    },

    #[error("invalid interval-partition: {0}")]
    InvalidPartition(String),

    #[error("invalid comb: {0}")]
    InvalidComb(String),

    #[error("invalid bridge: {0}")]
    InvalidBridge(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid ultrametric space: {0}")]
    InvalidSpace(String),

    #[error("invalid lambda measure: {0}")]
    InvalidMeasure(String),

    #[error("point {0} lies outside [0, 1]")]
    OutOfUnitInterval(f64),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("cannot parse lambda spec {spec:?}: {reason}")]
    LambdaSyntax { spec: String, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
