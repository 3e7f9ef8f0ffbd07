use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index out of range: {what} = {index}, allowed 1..={max}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("covariance is not positive definite: pivot {smallest_pivot:e} at row {row}")]
    NotPositiveDefinite { smallest_pivot: f64, row: usize },
    #[error("size cap exceeded: {requested} > {cap}")]
    SizeCapExceeded { requested: usize, cap: usize },
    #[error("Hermite order {0} exceeds the supported maximum of 64")]
    OrderTooLarge(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weight vector is not unit norm (|a|^2 = {0})")]
    NotUnitNorm(f64),
    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },
    #[error("invalid subordinator: {0}")]
    InvalidSubordinator(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("missing Hermite coefficient for multi-index {0:?}")]
    MissingCoefficient(Vec<usize>),
    #[error("combinatorial cap exceeded: {0}")]
    CapExceeded(String),
    #[error("Lambda domination violated by {margin:e} at pair {pair}")]
    DominationViolated { margin: f64, pair: usize },
    #[error("rank condition violated: D = {d} must be < 1/m = {bound} (m = {m})")]
    RankConditionViolated { d: f64, m: usize, bound: f64 },
    #[error("no finite Hermite rank up to order {0} on the grid")]
    RankNotFound(usize),
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
