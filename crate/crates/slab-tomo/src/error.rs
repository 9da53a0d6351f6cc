use crate::twisted::CoveringViolation;

/// Errors shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Division of a homogeneous polynomial by a linear form failed: the
    /// best least-squares quotient leaves a residual above the tolerance.
    #[error("not divisible by the linear form: residual {residual:.6e} exceeds threshold {threshold:.6e}")]
    NotDivisible { residual: f64, threshold: f64 },

    #[error("covering group violation: {0}")]
    Covering(#[from] CoveringViolation),

    /// A JSON document failed validation; `path` points at the offending
    /// element, e.g. `modes[3].poly[0].alpha`.
    #[error("{path}: {message}")]
    Json { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn json(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Json {
            path: path.into(),
            message: msg.into(),
        }
    }
}
