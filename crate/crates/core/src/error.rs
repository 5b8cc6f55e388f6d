use thiserror::Error;

/// Errors produced by the evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model parameter violates its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An infinite series did not converge within the term budget.
    #[error("series truncated after {terms} terms (last term / partial sum = {ratio:e})")]
    Truncation { terms: usize, ratio: f64 },

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error(
        "quadrature failed: achieved {achieved:e}, requested {requested:e} after {panels} panels"
    )]
    Quadrature {
        achieved: f64,
        requested: f64,
        panels: usize,
    },

    /// Fourier inversion truncation error is above the target.
    #[error("inversion tail bound {bound:e} exceeds tolerance {tol:e} at cutoff {cutoff}; increase the cutoff")]
    Inversion { bound: f64, tol: f64, cutoff: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "time must be positive and finite, got {t}"
        )))
    }
}
