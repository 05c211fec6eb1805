use thiserror::Error;

/// Errors raised by the accountants, oracles and their input validation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid kernel: row {row} {reason}")]
    InvalidKernel { row: usize, reason: String },

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("operation requires coordinates but support point {0} is a bare label")]
    MissingCoordinates(usize),

    #[error("quadrature did not converge: error estimate {error_estimate:e} after {evaluations} evaluations")]
    QuadratureNonConvergence {
        error_estimate: f64,
        evaluations: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects NaN and non-positive values.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && !value.is_nan() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be > 0, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be >= 0, got {value}")))
    }
}

pub(crate) fn require_order(alpha: f64) -> Result<()> {
    if alpha > 1.0 {
        Ok(())
    } else {
        Err(invalid(
            "alpha",
            format!("Rényi order must be > 1, got {alpha}"),
        ))
    }
}

pub(crate) fn require_finite_order(alpha: f64) -> Result<()> {
    require_order(alpha)?;
    if alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid("alpha", "Rényi order must be finite here"))
    }
}
