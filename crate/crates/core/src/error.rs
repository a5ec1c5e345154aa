use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("node index {index} out of range for {nodes} nodes")]
    NodeOutOfRange { index: usize, nodes: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("feasible set has infinite diameter")]
    UnboundedSet,

    #[error("operation requires {0}")]
    Unsupported(String),

    #[error("target chi {target} outside achievable range [{min}, {max}]")]
    ChiOutOfRange { target: f64, min: f64, max: f64 },

    #[error("no convergence after {iters} iterations (last residual {residual:e})")]
    NotConverged { iters: usize, residual: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NodeOutOfRange { .. } => "node_out_of_range",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InvalidSchedule(_) => "invalid_schedule",
            Error::Disconnected => "disconnected",
            Error::UnboundedSet => "unbounded_set",
            Error::Unsupported(_) => "unsupported",
            Error::ChiOutOfRange { .. } => "chi_out_of_range",
            Error::NotConverged { .. } => "not_converged",
            Error::NonFinite(_) => "non_finite",
            Error::Parse(_) => "parse",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
