use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameter: {0}")]
    InvalidModel(String),

    #[error("critical amplitude is undefined at |k| = 0")]
    UndefinedCutoff,

    #[error("zero cascade flux: breakdown wavenumber is infinite")]
    InfiniteBreakdown,

    #[error("size mismatch: expected {expected} values, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("stability guard violated: {0}")]
    StabilityGuard(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("exponential integral diverges at x = 0")]
    EiDivergence,

    #[error("logarithmic singularity: density at s = 0 with nonzero flux")]
    LogSingularity,

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("negative density {value:e} in cell {cell}")]
    NegativeDensity { cell: usize, value: f64 },

    #[error("resource guard: {0}")]
    Guard(String),

    #[error("conservation drift alarm: {quantity} drifted by {drift:e} (relative)")]
    ConservationDrift { quantity: &'static str, drift: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
