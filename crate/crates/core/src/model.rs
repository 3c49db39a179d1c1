//! The Gamma distribution in the shape/scale parametrization
//!
//! `p(x | α, β) = x^(α-1) exp(-x/β) / (Γ(α) β^α)`, `x > 0`.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};
use crate::specfun::{digamma_unchecked, ln_gamma_unchecked};

/// Shape `α` and scale `β` of a Gamma law. Both strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    shape: f64,
    scale: f64,
}

impl GammaParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(Error::Domain(format!(
                "shape must be finite and > 0, got {shape}"
            )));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!(
                "scale must be finite and > 0, got {scale}"
            )));
        }
        Ok(Self { shape, scale })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Rate `1/β`.
    pub fn rate(&self) -> f64 {
        1.0 / self.scale
    }
}

/// A validated vector of positive observations with cached sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    sum: f64,
    sum_log: f64,
    mean: f64,
    variance: f64,
}

impl Sample {
    /// Fails if `values` is empty or holds a non-positive or non-finite entry.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData(
                "a sample needs at least one observation".into(),
            ));
        }
        if let Some((i, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::Domain(format!(
                "observation {} is {v}; all observations must be finite and > 0",
                i + 1
            )));
        }
        let n = values.len() as f64;
        let sum: f64 = values.iter().sum();
        let sum_log: f64 = values.iter().map(|v| v.ln()).sum();
        let mean = sum / n;
        let variance = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Self {
            values,
            sum,
            sum_log,
            mean,
            variance,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for the `len`/`is_empty` convention.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn sum_log(&self) -> f64 {
        self.sum_log
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn mean_log(&self) -> f64 {
        self.sum_log / self.len() as f64
    }

    /// Unbiased variance (divisor `n - 1`); zero for a single observation.
    pub fn variance(&self) -> f64 {
        self.variance
    }
}

/// Log density of one observation.
pub fn log_pdf(x: f64, p: &GammaParams) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!(
            "log_pdf is defined for x > 0, got {x}"
        )));
    }
    Ok(log_pdf_unchecked(x, p))
}

fn log_pdf_unchecked(x: f64, p: &GammaParams) -> f64 {
    (p.shape - 1.0) * x.ln() - ln_gamma_unchecked(p.shape) - p.shape * p.scale.ln() - x / p.scale
}

/// Log-likelihood of the whole sample, computed from its sufficient statistics.
pub fn log_likelihood(s: &Sample, p: &GammaParams) -> f64 {
    let n = s.len() as f64;
    let (a, b) = (p.shape, p.scale);
    n * (a - 1.0) * s.mean_log() - n * ln_gamma_unchecked(a) - n * a * b.ln() - n * s.mean() / b
}

/// Log-likelihood with the scale replaced by its maximizer `mean/α`.
pub fn profile_log_likelihood(s: &Sample, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!(
            "shape must be finite and > 0, got {alpha}"
        )));
    }
    let n = s.len() as f64;
    Ok(
        n * (alpha - 1.0) * s.mean_log()
            - n * ln_gamma_unchecked(alpha)
            - n * alpha * s.mean().ln()
            + n * alpha * alpha.ln()
            - n * alpha,
    )
}

/// Mean `αβ` and variance `αβ²`.
pub fn moments(p: &GammaParams) -> (f64, f64) {
    (p.shape * p.scale, p.shape * p.scale * p.scale)
}

/// KL(p ‖ q) in closed form.
pub fn kl_divergence(p: &GammaParams, q: &GammaParams) -> f64 {
    let (ap, bp) = (p.shape, p.scale);
    let (aq, bq) = (q.shape, q.scale);
    let kl = (ap - aq) * digamma_unchecked(ap) - ln_gamma_unchecked(ap)
        + ln_gamma_unchecked(aq)
        + aq * (bq.ln() - bp.ln())
        + ap * (bp - bq) / bq;
    // rounding can leave a tiny negative value near p == q
    kl.max(0.0)
}

/// Draws `n` observations from `p` with a generator private to this call.
pub fn sample(p: &GammaParams, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::InsufficientData(
            "cannot draw an empty sample".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let values = (0..n).map(|_| draw(&mut rng, p)).collect();
    Sample::new(values)
}

/// One Gamma variate by the Marsaglia–Tsang squeeze method. For `α < 1` a
/// variate with shape `α + 1` is multiplied by `U^(1/α)`.
pub fn draw(rng: &mut Rng, p: &GammaParams) -> f64 {
    loop {
        let x = if p.shape < 1.0 {
            let boost: f64 = rng.random::<f64>().powf(1.0 / p.shape);
            marsaglia_tsang(rng, p.shape + 1.0) * boost
        } else {
            marsaglia_tsang(rng, p.shape)
        };
        let x = x * p.scale;
        // U^(1/α) underflows for very small shapes; redraw instead of returning 0
        if x > 0.0 && x.is_finite() {
            return x;
        }
    }
}

fn marsaglia_tsang(rng: &mut Rng, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.random();
        let z2 = z * z;
        if u < 1.0 - 0.0331 * z2 * z2 || u.ln() < 0.5 * z2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}
