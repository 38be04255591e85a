use thiserror::Error;

/// Errors produced by the library.
///
/// The variants map one-to-one onto the CLI exit-code classes: invalid
/// input, resource limits and numeric failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit exceeded: {what} = {requested} exceeds the limit {limit}")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    /// A Cholesky pivot fell below the relative positivity threshold.
    #[error("loss of positive definiteness at pivot {pivot}: pivot value {value:e} below threshold {threshold:e}")]
    NotPositiveDefinite {
        pivot: usize,
        value: f64,
        threshold: f64,
    },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:e}, required {required:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        required: f64,
    },

    #[error(
        "truncation too small: moment of order {order} needs N >= {required}, have N = {have}"
    )]
    TruncationInsufficient {
        order: usize,
        required: usize,
        have: usize,
    },

    #[error("threshold condition never held for d <= {limit}")]
    ThresholdNotFound { limit: usize },

    #[error("cache file {path}: {reason}")]
    Cache { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for the numeric-failure class (positivity loss, non-convergence).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::NoConvergence { .. }
                | Error::ThresholdNotFound { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks that `q` lies strictly inside (-1, 1).
pub fn validate_q(q: f64) -> Result<f64> {
    if q.is_finite() && q > -1.0 && q < 1.0 {
        Ok(q)
    } else {
        Err(Error::invalid(format!(
            "q = {q} must lie strictly inside (-1, 1)"
        )))
    }
}
