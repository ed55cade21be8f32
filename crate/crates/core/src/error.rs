use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u32, u32),

    #[error("galois exponent {t} is not a unit modulo {n}")]
    NotCoprime { t: i64, n: u32 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid PD code: {0}")]
    InvalidPd(String),

    #[error("unknown component {0}")]
    UnknownComponent(String),

    #[error("color {color} out of range (max {max})")]
    ColorOutOfRange { color: usize, max: usize },

    #[error("division by a vanishing quantum integer [{0}]")]
    VanishingQuantumInteger(i64),

    #[error("frontier width {width} exceeds cap {cap}")]
    FrontierCap { width: usize, cap: usize },

    #[error("invariant is not integral: {0}")]
    NonIntegral(String),

    #[error("generator has both a real and an i-part: {0}")]
    MixedGenerator(String),

    #[error("p = {0} must be a prime >= 5")]
    BadPrime(u32),

    #[error("unsupported theory: {0}")]
    UnsupportedTheory(String),

    #[error("catalog: {0}")]
    Catalog(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
