use thiserror::Error;

/// Errors produced by the library.
///
/// The CLI maps these onto process exit codes, see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value outside the domain: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("internal inconsistency in {what} (residual {residual:e})")]
    Inconsistency { what: String, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("trajectory left the safety box at t = {time} (|x|_inf = {norm:e})")]
    Divergence { time: f64, norm: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn inconsistent(what: impl Into<String>, residual: f64) -> Self {
        Error::Inconsistency {
            what: what.into(),
            residual,
        }
    }

    /// Process exit code: 2 for bad input, 3 for a violated internal
    /// invariant, 4 for divergence in trajectory mode.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Inconsistency { .. } | Error::Numeric(_) => 3,
            Error::Divergence { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
