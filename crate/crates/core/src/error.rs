use thiserror::Error;

/// Errors raised by the catalysis toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty probability vector")]
    Empty,

    #[error("negative probability {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("probabilities do not sum to 1 (sum = {0})")]
    NotNormalized(f64),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("reference weights must be strictly positive (index {0})")]
    NonPositiveWeight(usize),

    #[error("inverse temperature must be finite and >= 0 (got {0})")]
    InvalidBeta(f64),

    #[error("distribution has a zero entry at index {0}; full support required")]
    ZeroEntry(usize),

    #[error("product size {size} exceeds the cap of {cap} entries")]
    SizeCap { size: u128, cap: usize },

    #[error("factor index {0} out of range")]
    FactorOutOfRange(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("source does not majorize target")]
    NotMajorized,

    #[error("dimension {dim} exceeds the oracle cap of {cap}")]
    OracleCap { dim: usize, cap: usize },

    #[error("rate undefined: {0}")]
    UndefinedRate(String),

    #[error("no finite copy number: asymptotic rate {0} <= 1")]
    NoFiniteN(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("finite-temperature reference: feasibility-check only, protocol simulation needs a uniform reference")]
    FiniteTemperature,

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
