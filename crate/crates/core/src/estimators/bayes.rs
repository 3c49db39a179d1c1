//! Conjugate-prior Bayesian estimators.
//!
//! The rate `R = 1/β` has a proper Gamma conjugate prior `G(R | d, e)`
//! whose posterior is `G(R | d + nα, e + Σx)`. The shape has none, so two
//! unnormalized priors are used, and the posterior mean of `α` is replaced
//! by the mode of its Laplace approximation:
//!
//! * BL1: `p(α) ∝ a^(α-1) R^(αc) / Γ(α)^b`, posterior `(a Πx, b + n, c + n)`,
//!   mode `ψ⁻¹((ln â + ĉ ln R) / b̂)` with `R = d̂/ê` refreshed every pass.
//! * BL2: `ln p(α) = w0 + w1 α + w2 ln α`, conjugate to the local
//!   approximation `k0 + k1 α + k2 ln α` of the profile log-likelihood;
//!   mode `-w̃2/w̃1` with `w̃ = w + k`.

use serde::{Deserialize, Serialize};

use super::{
    initial_shape, iterate, ConvergenceConfig, FitResult, Method, Posterior, RatePrior,
    ShapePriorBl1, ShapePriorBl2,
};
use crate::error::{Error, Result};
use crate::model::{profile_log_likelihood, GammaParams, Sample};
use crate::specfun::{
    digamma_unchecked, inverse_digamma, ln_gamma_unchecked, trigamma_unchecked, SpecFunConfig,
};

/// Posterior `G(R | d̂, ê)` of the rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePosterior {
    pub d_hat: f64,
    pub e_hat: f64,
}

impl RatePosterior {
    /// Posterior mean of the rate, `d̂/ê`.
    pub fn rate(&self) -> f64 {
        self.d_hat / self.e_hat
    }

    /// Scale estimate `ê/d̂`.
    pub fn scale(&self) -> f64 {
        self.e_hat / self.d_hat
    }
}

/// `d̂ = d + nα`, `ê = e + Σx`.
pub fn rate_posterior(prior: &RatePrior, s: &Sample, alpha: f64) -> RatePosterior {
    RatePosterior {
        d_hat: prior.d + s.len() as f64 * alpha,
        e_hat: prior.e + s.sum(),
    }
}

/// Unnormalized log of the BL1 shape prior at rate `r`:
/// `(α-1) ln a + αc ln R - b lnΓ(α)`.
pub fn bl1_log_prior(alpha: f64, prior: &ShapePriorBl1, r: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!(
            "shape must be finite and > 0, got {alpha}"
        )));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!(
            "rate must be finite and > 0, got {r}"
        )));
    }
    Ok(
        (alpha - 1.0) * prior.log_a + alpha * prior.c * r.ln()
            - prior.b * ln_gamma_unchecked(alpha),
    )
}

/// Mode of [`bl1_log_prior`] in `α`: `ψ⁻¹((ln a + c ln R)/b)`.
pub fn bl1_prior_mode(prior: &ShapePriorBl1, r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!(
            "rate must be finite and > 0, got {r}"
        )));
    }
    inverse_digamma(
        (prior.log_a + prior.c * r.ln()) / prior.b,
        &SpecFunConfig::default(),
    )
}

/// Posterior shape hyperparameters `(ln â, b̂, ĉ)` in the same record type
/// as the prior.
fn bl1_shape_posterior(s: &Sample, prior: &ShapePriorBl1) -> ShapePriorBl1 {
    let n = s.len() as f64;
    ShapePriorBl1 {
        log_a: prior.log_a + s.sum_log(),
        b: prior.b + n,
        c: prior.c + n,
    }
}

/// One BL1 step:
/// `ψ⁻¹((ln â + ĉ (ln(d + nα) - ln ê)) / b̂)`.
pub fn bl1_update(
    s: &Sample,
    shape_prior: &ShapePriorBl1,
    rate_prior: &RatePrior,
    alpha: f64,
) -> Result<f64> {
    let post = bl1_shape_posterior(s, shape_prior);
    let e_hat = rate_prior.e + s.sum();
    bl1_step(s, &post, rate_prior.d, e_hat, alpha)
}

fn bl1_step(s: &Sample, post: &ShapePriorBl1, d: f64, e_hat: f64, alpha: f64) -> Result<f64> {
    let log_rate = (d + s.len() as f64 * alpha).ln() - e_hat.ln();
    inverse_digamma(
        (post.log_a + post.c * log_rate) / post.b,
        &SpecFunConfig::default(),
    )
}

pub fn fit_bl1(
    s: &Sample,
    shape_prior: &ShapePriorBl1,
    rate_prior: &RatePrior,
    cfg: &ConvergenceConfig,
) -> Result<FitResult> {
    fit_bl1_traced(s, shape_prior, rate_prior, cfg, None)
}

pub(super) fn fit_bl1_traced(
    s: &Sample,
    shape_prior: &ShapePriorBl1,
    rate_prior: &RatePrior,
    cfg: &ConvergenceConfig,
    trace: Option<&mut Vec<f64>>,
) -> Result<FitResult> {
    let alpha0 = initial_shape(s)?;
    let post = bl1_shape_posterior(s, shape_prior);
    let e_hat = rate_prior.e + s.sum();
    let it = iterate(
        alpha0,
        cfg,
        |a| bl1_step(s, &post, rate_prior.d, e_hat, a),
        trace,
    )?;
    let rate = rate_posterior(rate_prior, s, it.alpha);
    Ok(FitResult {
        params: GammaParams::new(it.alpha, rate.scale())?,
        method: Method::Bl1,
        iterations: it.iterations,
        converged: it.converged,
        posterior: Some(Posterior::Bl1 {
            d_hat: rate.d_hat,
            e_hat: rate.e_hat,
            log_a_hat: post.log_a,
            b_hat: post.b,
            c_hat: post.c,
        }),
        laplace_precision: Some(post.b * trigamma_unchecked(it.alpha)),
        safeguard_steps: it.safeguard_steps,
    })
}

/// Coefficients of `k0 + k1 α + k2 ln α`, the local approximation of the
/// profile log-likelihood matching its value, slope and curvature at `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bl2Coefficients {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
}

pub fn bl2_coefficients(s: &Sample, alpha: f64) -> Result<Bl2Coefficients> {
    let n = s.len() as f64;
    let tri = trigamma_unchecked(alpha);
    let k1 = n
        * (s.mean_log() - digamma_unchecked(alpha) - s.mean().ln() + alpha.ln() - alpha * tri
            + 1.0);
    let k2 = n * alpha * alpha * tri - n * alpha;
    let k0 = profile_log_likelihood(s, alpha)? - k1 * alpha - k2 * alpha.ln();
    Ok(Bl2Coefficients { k0, k1, k2 })
}

/// One BL2 step: `α ← -w̃2/w̃1` with `w̃ = w + k(α)`.
pub fn bl2_update(s: &Sample, prior: &ShapePriorBl2, alpha: f64) -> Result<f64> {
    let k = bl2_coefficients(s, alpha)?;
    let w1 = prior.w1 + k.k1;
    let w2 = prior.w2 + k.k2;
    if w1 >= 0.0 {
        return Err(ill_posed(w1, alpha));
    }
    Ok(-w2 / w1)
}

fn ill_posed(w1: f64, alpha: f64) -> Error {
    Error::IllPosedPosterior(format!(
        "posterior linear coefficient w1 = {w1} is not negative at alpha = {alpha}; \
         the Laplace mode would not be positive"
    ))
}

pub fn fit_bl2(
    s: &Sample,
    shape_prior: &ShapePriorBl2,
    rate_prior: &RatePrior,
    cfg: &ConvergenceConfig,
) -> Result<FitResult> {
    fit_bl2_traced(s, shape_prior, rate_prior, cfg, None)
}

pub(super) fn fit_bl2_traced(
    s: &Sample,
    shape_prior: &ShapePriorBl2,
    rate_prior: &RatePrior,
    cfg: &ConvergenceConfig,
    trace: Option<&mut Vec<f64>>,
) -> Result<FitResult> {
    let alpha0 = initial_shape(s)?;
    let it = iterate(alpha0, cfg, |a| bl2_update(s, shape_prior, a), trace)?;
    let alpha = it.alpha;
    let k = bl2_coefficients(s, alpha)?;
    let w1 = shape_prior.w1 + k.k1;
    if w1 >= 0.0 {
        return Err(ill_posed(w1, alpha));
    }
    let w2 = shape_prior.w2 + k.k2;
    let rate = rate_posterior(rate_prior, s, alpha);
    Ok(FitResult {
        params: GammaParams::new(alpha, rate.scale())?,
        method: Method::Bl2,
        iterations: it.iterations,
        converged: it.converged,
        posterior: Some(Posterior::Bl2 {
            d_hat: rate.d_hat,
            e_hat: rate.e_hat,
            w0_tilde: shape_prior.w0 + k.k0,
            w1_tilde: w1,
            w2_tilde: w2,
        }),
        laplace_precision: Some(w2 / (alpha * alpha)),
        safeguard_steps: it.safeguard_steps,
    })
}
