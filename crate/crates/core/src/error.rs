use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed a malformed argument (dimension mismatch, bad order...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An operation was asked about a set it is not defined on (empty cloud...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("insufficient data: {found} neighbors found, {needed} needed")]
    InsufficientData { found: usize, needed: usize },

    #[error("ill-conditioned local system: lambda_min = {lambda_min:e} with {neighbors} neighbors")]
    IllConditioned { lambda_min: f64, neighbors: usize },

    #[error("infeasible local frame: {0}")]
    Infeasible(String),

    #[error("frame iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("{failed} of {total} local fits failed, above the allowed fraction {allowed}")]
    FailureBudget { failed: usize, total: usize, allowed: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
