use thiserror::Error;

/// Errors raised across the solver, checkers and batch front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size n = {0} must be even and at least 4")]
    OddSize(usize),
    #[error("grid dimension {0} outside 1..=3")]
    BadDim(usize),
    #[error("grid extent {0} must be positive and finite")]
    BadExtent(f64),
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },
    #[error("field is on the {found} side, expected {expected}")]
    WrongSide { expected: &'static str, found: &'static str },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("frequency vector has length {found}, symbol expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("logarithm of zero at t = {t}, xi = {xi:?}")]
    ZeroArgument { t: f64, xi: Vec<f64> },
    #[error("quadrature did not reach tolerance {abs_tol:e} on [{a}, {b}] (last change {last_change:e})")]
    QuadratureDivergence {
        a: f64,
        b: f64,
        abs_tol: f64,
        last_change: f64,
    },
    #[error("log-magnitude {log_mag} exceeds materialization limit")]
    MagnitudeOverflow { log_mag: f64 },
    #[error("kernel multiplier overflows on {} modes", modes.len())]
    KernelOverflow { modes: Vec<usize> },
    #[error("radius {radius} exceeds grid frequency radius {grid_radius}")]
    RadiusExceedsGrid { radius: f64, grid_radius: f64 },
    #[error("test function support radius {support} exceeds grid frequency radius {grid_radius}")]
    SupportExceedsGrid { support: f64, grid_radius: f64 },
    #[error("weight {name} is not positive ({value}) at sample {index}")]
    WeightNotPositive {
        name: &'static str,
        value: f64,
        index: usize,
    },
    #[error("trajectory has {found} snapshots, need at least {needed}")]
    InsufficientTimes { found: usize, needed: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
