use thiserror::Error;

/// Errors raised across the pricing stack.
#[derive(Debug, Error)]
pub enum PricingError {
    /// Input outside an operation's domain (bad bounds, t <= 0, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Structurally invalid configuration or model.
    #[error("validation error: {0}")]
    Validation(String),
    /// Sizes of two operands disagree.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    /// Contract shape not supported by the requested pricer.
    #[error("unsupported contract: {0}")]
    UnsupportedContract(String),
    /// Time stepping blew up or produced non-finite values.
    #[error("numerical divergence at tau = {tau}: {reason}")]
    Divergence { tau: f64, reason: String },
    /// A qubit or parameter index is out of range.
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PricingError>;

impl PricingError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Self::Validation(msg.into())
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Divergence { .. } => 3,
            Self::Io(_) => 1,
            _ => 2,
        }
    }
}
