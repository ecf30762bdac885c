use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the function it was passed to.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Cholesky or eigen-based positive-definiteness test failed.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("matrix is numerically singular (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("design matrix is rank deficient: {0}")]
    RankDeficient(String),

    /// The knockoff construction needs at least twice as many rows as columns.
    #[error("knockoff construction needs n >= 2d (n = {n}, d = {d})")]
    InsufficientRows { n: usize, d: usize },

    /// `H(1/d)` is below the requested calibration target.
    #[error("calibration target {target:.6e} exceeds H(1/d) = {upper:.6e}")]
    Unattainable { target: f64, upper: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data ingestion: {0}")]
    Data(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
