use thiserror::Error;

/// Errors produced by the expose library.
#[derive(Debug, Error)]
pub enum ExposeError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("input contains a non-finite value")]
    NonFinite,

    #[error("bandwidth must be a positive finite number, got {0}")]
    InvalidBandwidth(f64),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operation requires a model in {expected} mode, found {actual}")]
    WrongMode {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("model has no observations yet")]
    Unfitted,

    #[error("weight vector has zero norm, normalized score is undefined")]
    ZeroNormWeights,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("metric requires both classes, got a single class")]
    SingleClass,

    #[error("Iman-Davenport statistic saturated: chi2_F >= m(k-1)")]
    SaturatedStatistic,

    #[error("no critical value tabulated for k = {k}")]
    OutsideTable { k: usize },

    #[error("no holdout set for concept {0}")]
    MissingHoldout(usize),

    #[error("invalid stream spec: {0}")]
    InvalidSpec(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("model file error: {0}")]
    ModelFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ExposeError>;
