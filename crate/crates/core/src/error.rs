use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants fall into two groups: invalid input (a violated precondition)
/// and numerical failure (the input was fine but a method did not reach
/// its tolerance). [`Error::is_invalid_input`] tells them apart, which the
/// command-line front end uses to pick an exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("gamma function pole at x = {0}")]
    GammaPole(f64),

    #[error("tail model does not decay fast enough: {0}")]
    DivergentTail(String),

    #[error("evaluation point t = {t} lies outside the sampled range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("operation not supported for this operand: {0}")]
    Unsupported(String),

    #[error("series did not converge within {terms} terms (last partial sum {partial})")]
    SeriesNonConvergence { terms: usize, partial: f64 },

    #[error("quadrature did not reach tolerance: estimate {value}, error {error}")]
    QuadratureNonConvergence { value: f64, error: f64 },

    #[error("step size violates the stability bound: {0}")]
    Unstable(String),

    #[error("optimizer failed: {reason} (best rmse so far {best_rmse})")]
    OptimizerFailure { reason: String, best_rmse: f64 },

    #[error("grid resolution insufficient: {0}")]
    Resolution(String),

    #[error("extrapolation unstable: {0}")]
    Extrapolation(String),

    #[error("memory budget exceeded: {requested} cells requested, cap is {cap}")]
    MemoryBudget { requested: u64, cap: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True when the error reports bad input rather than a numerical failure.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::GammaPole(_)
                | Error::DivergentTail(_)
                | Error::OutOfRange { .. }
                | Error::Unsupported(_)
                | Error::MemoryBudget { .. }
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_order(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")))
    }
}

pub(crate) fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite, got {v}")))
    }
}

pub(crate) fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}
