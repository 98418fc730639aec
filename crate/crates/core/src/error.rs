use thiserror::Error;

use crate::channel::Decision;

/// Errors raised by the analysis, optimization and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the domain of {func}")]
    Domain { func: &'static str, what: &'static str, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{0} did not converge")]
    NonConvergence(&'static str),

    #[error("sensing decision {0:?} has zero probability")]
    DegenerateDecision(Decision),

    #[error("channel coefficient is zero")]
    ZeroChannel,

    #[error("no sign change of the stationarity residual in [1e-12, 1e9] (rhs = {rhs:e})")]
    BracketExpansion { rhs: f64 },

    #[error(
        "dual iteration stopped after {iterations} iterations: \
         mu = {mu:?}, residuals = {residuals:?}"
    )]
    DualNonConvergence { iterations: usize, mu: [f64; 2], residuals: [f64; 2] },

    #[error("the feasible power region is empty")]
    Infeasible,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

/// Probability in `[0, 1]`.
pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(name, format!("{p} is not a probability in [0, 1]")))
    }
}

pub(crate) fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("{x} must be finite and > 0")))
    }
}

pub(crate) fn check_nonnegative(name: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("{x} must be finite and >= 0")))
    }
}
