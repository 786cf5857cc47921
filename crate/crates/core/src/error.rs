use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index set too large: C({k}+{n},{n}) = {size} exceeds the cap of {cap}")]
    Capacity {
        k: usize,
        n: usize,
        size: u128,
        cap: u128,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("analytic function `{0}` has no Taylor coefficients")]
    MissingCoefficients(String),

    #[error("singular tridiagonal system at row {row} (pivot {pivot:e})")]
    Singular { row: usize, pivot: f64 },

    #[error("blow-up at t = {t}: |u| = {value:e} exceeds {threshold:e}")]
    BlowUp { t: f64, value: f64, threshold: f64 },

    #[error("non-finite value in coefficient {ordinal} at t = {t}")]
    NonFinite { ordinal: usize, t: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
