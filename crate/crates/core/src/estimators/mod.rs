//! Gamma parameter estimators behind one interface.
//!
//! | method | shape update                                   | scale            |
//! |--------|------------------------------------------------|------------------|
//! | MM     | `x̄² / v` (closed form)                         | `v / x̄`          |
//! | ML1    | `ψ⁻¹(ln α + mean(ln x) - ln x̄)`                | `x̄ / α`          |
//! | ML2    | generalized Newton step on `1/α`               | `x̄ / α`          |
//! | BL1    | Laplace mode of the conjugate shape posterior  | `ê / d̂`          |
//! | BL2    | Laplace mode `-w̃₂ / w̃₁`                        | `ê / d̂`          |
//!
//! The iterative methods all start from the MM shape and stop when the
//! relative change in `α` between consecutive iterates drops below
//! `rel_tol`.

mod bayes;
mod ml;
mod moments;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GammaParams, Sample};

pub use bayes::{
    bl1_log_prior, bl1_prior_mode, bl1_update, bl2_coefficients, bl2_update, fit_bl1, fit_bl2,
    rate_posterior, Bl2Coefficients, RatePosterior,
};
pub use ml::{fit_ml1, fit_ml2, ml1_update, ml2_update};
pub use moments::fit_mm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "MM")]
    Mm,
    #[serde(rename = "ML1")]
    Ml1,
    #[serde(rename = "ML2")]
    Ml2,
    #[serde(rename = "BL1")]
    Bl1,
    #[serde(rename = "BL2")]
    Bl2,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Mm,
        Method::Ml1,
        Method::Ml2,
        Method::Bl1,
        Method::Bl2,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mm => "MM",
            Method::Ml1 => "ML1",
            Method::Ml2 => "ML2",
            Method::Bl1 => "BL1",
            Method::Bl2 => "BL2",
        }
    }

    pub fn is_iterative(&self) -> bool {
        !matches!(self, Method::Mm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Domain(format!("unknown method '{s}'")))
    }
}

/// Gamma prior `G(R | d, e)` (shape `d`, rate `e`) on the rate `R = 1/β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePrior {
    pub d: f64,
    pub e: f64,
}

impl RatePrior {
    pub fn new(d: f64, e: f64) -> Result<Self> {
        positive("d", d)?;
        positive("e", e)?;
        Ok(Self { d, e })
    }
}

impl Default for RatePrior {
    fn default() -> Self {
        Self { d: 1e-3, e: 1e-3 }
    }
}

/// Unnormalized conjugate shape prior `a^(α-1) R^(αc) / Γ(α)^b`, with `a`
/// kept in the log domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapePriorBl1 {
    pub log_a: f64,
    pub b: f64,
    pub c: f64,
}

impl ShapePriorBl1 {
    pub fn new(log_a: f64, b: f64, c: f64) -> Result<Self> {
        if !log_a.is_finite() {
            return Err(Error::Domain(format!("log a must be finite, got {log_a}")));
        }
        positive("b", b)?;
        positive("c", c)?;
        Ok(Self { log_a, b, c })
    }

    /// Convenience constructor taking `a` itself.
    pub fn from_a(a: f64, b: f64, c: f64) -> Result<Self> {
        positive("a", a)?;
        Self::new(a.ln(), b, c)
    }
}

impl Default for ShapePriorBl1 {
    fn default() -> Self {
        Self {
            log_a: 0.0,
            b: 1e-3,
            c: 1e-3,
        }
    }
}

/// Shape prior `log p(α) = w0 + w1 α + w2 ln α` (up to a constant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapePriorBl2 {
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
}

impl ShapePriorBl2 {
    pub fn new(w0: f64, w1: f64, w2: f64) -> Result<Self> {
        if ![w0, w1, w2].iter().all(|w| w.is_finite()) {
            return Err(Error::Domain("BL2 prior weights must be finite".into()));
        }
        Ok(Self { w0, w1, w2 })
    }

    /// `w1 = w2 = 0`.
    pub fn flat() -> Self {
        Self {
            w0: 1.0,
            w1: 0.0,
            w2: 0.0,
        }
    }
}

impl Default for ShapePriorBl2 {
    fn default() -> Self {
        Self::flat()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    /// Stop when `|α_new - α_old| / α_old < rel_tol`.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl ConvergenceConfig {
    pub fn new(rel_tol: f64, max_iter: usize) -> Result<Self> {
        positive("rel_tol", rel_tol)?;
        if max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1".into()));
        }
        Ok(Self { rel_tol, max_iter })
    }
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            max_iter: 1000,
        }
    }
}

/// Everything a fit may need besides the sample. Defaults are the
/// near-non-informative values under which BL1/BL2 approach ML1/ML2.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FitOptions {
    pub convergence: ConvergenceConfig,
    pub rate_prior: RatePrior,
    pub bl1_prior: ShapePriorBl1,
    pub bl2_prior: ShapePriorBl2,
}

/// Posterior hyperparameters of the Bayesian fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Posterior {
    Bl1 {
        d_hat: f64,
        e_hat: f64,
        log_a_hat: f64,
        b_hat: f64,
        c_hat: f64,
    },
    Bl2 {
        d_hat: f64,
        e_hat: f64,
        w0_tilde: f64,
        w1_tilde: f64,
        w2_tilde: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: GammaParams,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    pub posterior: Option<Posterior>,
    /// Precision of the Laplace approximation at the mode (BL1, BL2 only).
    pub laplace_precision: Option<f64>,
    /// Number of halvings applied to proposals that left `(0, ∞)`.
    pub safeguard_steps: usize,
}

/// Fits `method` to `sample`.
pub fn fit(sample: &Sample, method: Method, opts: &FitOptions) -> Result<FitResult> {
    fit_inner(sample, method, opts, None)
}

/// Like [`fit`], also returning the shape iterates (starting with the MM
/// initializer). For MM the trace holds the single closed-form value.
pub fn fit_traced(
    sample: &Sample,
    method: Method,
    opts: &FitOptions,
) -> Result<(FitResult, Vec<f64>)> {
    let mut trace = Vec::new();
    let res = fit_inner(sample, method, opts, Some(&mut trace))?;
    if trace.is_empty() {
        trace.push(res.params.shape());
    }
    Ok((res, trace))
}

fn fit_inner(
    sample: &Sample,
    method: Method,
    opts: &FitOptions,
    trace: Option<&mut Vec<f64>>,
) -> Result<FitResult> {
    let cfg = &opts.convergence;
    match method {
        Method::Mm => fit_mm(sample),
        Method::Ml1 => ml::fit_ml1_traced(sample, cfg, trace),
        Method::Ml2 => ml::fit_ml2_traced(sample, cfg, trace),
        Method::Bl1 => bayes::fit_bl1_traced(sample, &opts.bl1_prior, &opts.rate_prior, cfg, trace),
        Method::Bl2 => bayes::fit_bl2_traced(sample, &opts.bl2_prior, &opts.rate_prior, cfg, trace),
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

/// Checks shared by every iterative method and returns the MM shape used
/// as the starting point.
fn initial_shape(s: &Sample) -> Result<f64> {
    let alpha = moments::mm_shape(s)?;
    if s.mean_log() >= s.mean().ln() {
        return Err(Error::DegenerateSample(
            "mean of logs is not below log of mean; the likelihood has no finite maximizer".into(),
        ));
    }
    Ok(alpha)
}

struct Iteration {
    alpha: f64,
    iterations: usize,
    converged: bool,
    safeguard_steps: usize,
}

const MAX_HALVINGS: u32 = 50;

/// Runs `alpha <- update(alpha)` from `alpha0` until the relative change is
/// below `cfg.rel_tol` or `cfg.max_iter` updates were made. A proposal
/// outside `(0, ∞)` is pulled back toward the current iterate by halving.
fn iterate<F>(
    alpha0: f64,
    cfg: &ConvergenceConfig,
    mut update: F,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<Iteration>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut alpha = alpha0;
    let mut safeguard_steps = 0;
    if let Some(t) = trace.as_deref_mut() {
        t.push(alpha);
    }
    for it in 1..=cfg.max_iter {
        let proposal = update(alpha)?;
        let next = if proposal.is_finite() && proposal > 0.0 {
            proposal
        } else {
            safeguard_steps += 1;
            safeguard(alpha, proposal)?
        };
        let rel_change = (next - alpha).abs() / alpha;
        alpha = next;
        if let Some(t) = trace.as_deref_mut() {
            t.push(alpha);
        }
        if rel_change < cfg.rel_tol {
            return Ok(Iteration {
                alpha,
                iterations: it,
                converged: true,
                safeguard_steps,
            });
        }
    }
    Ok(Iteration {
        alpha,
        iterations: cfg.max_iter,
        converged: false,
        safeguard_steps,
    })
}

fn safeguard(current: f64, proposal: f64) -> Result<f64> {
    if proposal.is_nan() {
        return Err(Error::NumericalAnomaly(format!(
            "shape update produced NaN from alpha = {current}"
        )));
    }
    let step = if proposal.is_infinite() {
        // shrink a runaway step to a finite one before halving
        current * proposal.signum()
    } else {
        proposal - current
    };
    let mut scaled = step;
    for _ in 0..MAX_HALVINGS {
        scaled *= 0.5;
        let candidate = current + scaled;
        if candidate > 0.0 && candidate.is_finite() {
            return Ok(candidate);
        }
    }
    Err(Error::NumericalAnomaly(format!(
        "could not keep the shape positive after {MAX_HALVINGS} halvings from alpha = {current}"
    )))
}
