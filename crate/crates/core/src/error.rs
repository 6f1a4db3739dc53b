use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max asymmetry {residual:e})")]
    NotSymmetric { residual: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NotConverged { sweeps: usize, off: f64 },

    #[error("{what} exceeds the supported limit of {limit}")]
    Resource { what: &'static str, limit: usize },

    #[error("degenerate case: {0}")]
    Degenerate(&'static str),

    #[error("strategy '{strategy}' is not applicable: {reason}")]
    Inapplicable {
        strategy: String,
        reason: &'static str,
    },

    #[error("malformed transcript line {line}: {reason}")]
    Transcript { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Range guard used by the closed-form functions.
pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
