use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input failed a structural or range check.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A computation produced a non-finite or out-of-range value.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("degenerate measurement branch: outcome probability {probability:e} is below the branch threshold")]
    DegenerateBranch { probability: f64 },

    /// A named precondition of a bound or construction does not hold.
    #[error("constraint violated ({constraint}): {detail}")]
    Constraint {
        constraint: &'static str,
        detail: String,
    },

    #[error("invalid POVM: elements sum to identity only within {deviation:e}")]
    InvalidPovm { deviation: f64 },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("configuration error at {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }

    /// Process exit code used by the CLI: 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::DegenerateBranch { .. } | Error::Construction(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}
