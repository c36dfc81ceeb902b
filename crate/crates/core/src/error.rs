use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pole: {0}")]
    Pole(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("series cap of {0} terms reached")]
    Cap(usize),
    #[error("index {index} out of range (available: {available})")]
    Index { index: usize, available: usize },
    #[error("simple-zero check failed at k = {k}: |zeta'| = {modulus:e}")]
    SimpleZeroViolation { k: usize, modulus: f64 },
    #[error("realness violated: imaginary part {im:e} exceeds 10x error {err:e}")]
    RealnessViolation { im: f64, err: f64 },
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("checksum mismatch: expected {expected}, found {found}")]
    Checksum { expected: String, found: String },
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("disks overlap: {0}")]
    Disjointness(String),
    #[error("case error: {0}")]
    Case(String),
    #[error("step error: {0}")]
    Step(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("window error: {0}")]
    Window(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("missing cache: {0}")]
    MissingCache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Non-fatal conditions surfaced alongside a result.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Warning {
    MissedZero { t_max: f64, found: usize, expected: f64 },
    Precision { stored: u32, requested: u32 },
    Analyticity(String),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::MissedZero { t_max, found, expected } => {
                write!(f, "zero count {found} on [0, {t_max}] deviates from smooth estimate {expected:.2}")
            }
            Warning::Precision { stored, requested } => {
                write!(f, "cache stored at {stored} digits, {requested} requested")
            }
            Warning::Analyticity(m) => write!(f, "analyticity: {m}"),
        }
    }
}
