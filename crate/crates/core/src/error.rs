use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EssError {
    #[error("argument {x} lies outside [-1, 1]")]
    OutOfDomain { x: f64 },

    #[error("order {m} exceeds the supported maximum {max}")]
    OrderTooLarge { m: usize, max: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("sin^n expansion requires odd n in 1..={max}, got {n}")]
    InvalidSinPower { n: usize, max: usize },

    #[error("mean direction undefined: mean resultant length {mrl:e} is zero")]
    UndefinedMeanDirection { mrl: f64 },

    #[error("skewness undefined: 1 - mean resultant length = {gap:e}")]
    UndefinedSkewness { gap: f64 },

    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("optimizer failed to converge: {0}")]
    NonConvergence(String),

    #[error("degenerate variance in symmetry test")]
    DegenerateVariance,

    #[error("{0}")]
    InvalidConfig(String),

    #[error("line {line}: cannot parse {token:?} as a number")]
    Parse { line: usize, token: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for EssError {
    fn from(e: std::io::Error) -> Self {
        EssError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, EssError>;
