//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field contains a non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("singular point at flat index {index}: |psi|^2 = {density:.3e} with nonzero gradient and epsilon = 0")]
    SingularPoint { index: usize, density: f64 },

    #[error("state is not normalized: |norm - 1| = {defect:.3e}")]
    NotNormalized { defect: f64 },

    #[error("integration failure at t = {t:.6}: norm drift {drift:.3e} exceeds tolerance {allowed:.3e}")]
    NormDrift { t: f64, drift: f64, allowed: f64 },

    #[error("observable kernel is not hermitian at entry ({row}, {col})")]
    NotHermitian { row: usize, col: usize },

    #[error("empty mixture: every outcome weight fell below the truncation threshold {truncation:.3e}")]
    EmptyMixture { truncation: f64 },

    #[error("fit conditioning: {0}")]
    FitConditioning(String),

    #[error("quadrature did not reach the requested tolerance: estimated error {estimate:.3e}, requested {requested:.3e}")]
    QuadratureTolerance { estimate: f64, requested: f64 },

    #[error("argument out of range: {0}")]
    Range(String),

    #[error("unit mismatch: {0}")]
    UnitMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
