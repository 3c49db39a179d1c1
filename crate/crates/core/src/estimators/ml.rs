//! Maximum-likelihood shape iterations. Both maximize the profile
//! log-likelihood `L(α) = n(α-1)mean(ln x) - n lnΓ(α) - nα ln x̄ + nα ln α - nα`
//! and set `β = x̄/α` afterwards.

use super::{initial_shape, iterate, ConvergenceConfig, FitResult, Method};
use crate::error::{Error, Result};
use crate::model::{GammaParams, Sample};
use crate::specfun::{digamma_unchecked, inverse_digamma, trigamma_unchecked, SpecFunConfig};

/// One ML1 step: `ψ⁻¹(ln α + mean(ln x) - ln x̄)`, the maximizer of the
/// lower bound obtained by linearizing `α ln α` at the current `α`.
pub fn ml1_update(s: &Sample, alpha: f64) -> Result<f64> {
    inverse_digamma(
        alpha.ln() + s.mean_log() - s.mean().ln(),
        &SpecFunConfig::default(),
    )
}

/// One ML2 step: match `k0 + k1 α + k2 ln α` to `L` and its first two
/// derivatives at the current `α`, then jump to the maximizer:
///
/// `1/α ← 1/α + (mean(ln x) - ln x̄ + ln α - ψ(α)) / (α² (1/α - ψ₁(α)))`.
pub fn ml2_update(s: &Sample, alpha: f64) -> Result<f64> {
    let denom = alpha * alpha * (1.0 / alpha - trigamma_unchecked(alpha));
    if denom.is_nan() || denom >= 0.0 {
        return Err(Error::NumericalAnomaly(format!(
            "ML2 curvature term α²(1/α - ψ₁(α)) = {denom} is not negative at α = {alpha}"
        )));
    }
    let gradient = s.mean_log() - s.mean().ln() + alpha.ln() - digamma_unchecked(alpha);
    let inv = 1.0 / alpha + gradient / denom;
    Ok(1.0 / inv)
}

pub fn fit_ml1(s: &Sample, cfg: &ConvergenceConfig) -> Result<FitResult> {
    fit_ml1_traced(s, cfg, None)
}

pub fn fit_ml2(s: &Sample, cfg: &ConvergenceConfig) -> Result<FitResult> {
    fit_ml2_traced(s, cfg, None)
}

pub(super) fn fit_ml1_traced(
    s: &Sample,
    cfg: &ConvergenceConfig,
    trace: Option<&mut Vec<f64>>,
) -> Result<FitResult> {
    let alpha0 = initial_shape(s)?;
    let it = iterate(alpha0, cfg, |a| ml1_update(s, a), trace)?;
    finish(s, Method::Ml1, it)
}

pub(super) fn fit_ml2_traced(
    s: &Sample,
    cfg: &ConvergenceConfig,
    trace: Option<&mut Vec<f64>>,
) -> Result<FitResult> {
    let alpha0 = initial_shape(s)?;
    let it = iterate(alpha0, cfg, |a| ml2_update(s, a), trace)?;
    finish(s, Method::Ml2, it)
}

fn finish(s: &Sample, method: Method, it: super::Iteration) -> Result<FitResult> {
    Ok(FitResult {
        params: GammaParams::new(it.alpha, s.mean() / it.alpha)?,
        method,
        iterations: it.iterations,
        converged: it.converged,
        posterior: None,
        laplace_precision: None,
        safeguard_steps: it.safeguard_steps,
    })
}
