//! Special functions used by the estimators: log-gamma, digamma, trigamma,
//! inverse digamma and the regularized incomplete beta function.
//!
//! Everything here is a pure function of its arguments. Log-gamma, digamma
//! and trigamma shift the argument upwards with the usual recurrences and
//! finish with the Stirling / asymptotic series.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Stirling series coefficients B_{2k} / (2k (2k - 1)), k = 1..8.
const LN_GAMMA_SERIES: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// B_{2k} / (2k), k = 1..7, for ψ(x) ~ ln x - 1/(2x) - Σ c_k x^{-2k}.
const DIGAMMA_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
];

/// Bernoulli numbers B_{2k}, k = 1..7, for ψ₁(x) ~ 1/x + 1/(2x²) + Σ B_{2k} x^{-2k-1}.
const TRIGAMMA_SERIES: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

const LN_GAMMA_SHIFT: f64 = 15.0;
const POLYGAMMA_SHIFT: f64 = 6.0;

fn check_positive(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} requires a finite positive argument, got {x}"
        )))
    }
}

/// Natural logarithm of the Gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive(x, "log_gamma")?;
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut prod = 1.0;
    while z < LN_GAMMA_SHIFT {
        prod *= z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut term = inv;
    for c in LN_GAMMA_SERIES {
        series += c * term;
        term *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series - prod.ln()
}

/// Digamma function ψ(x) = d ln Γ(x) / dx for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive(x, "digamma")?;
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut acc = 0.0;
    while z < POLYGAMMA_SHIFT {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    let mut term = inv2;
    for c in DIGAMMA_SERIES {
        series += c * term;
        term *= inv2;
    }
    acc + z.ln() - 0.5 / z - series
}

/// Trigamma function ψ₁(x) = dψ(x)/dx for `x > 0`. Always strictly positive.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive(x, "trigamma")?;
    Ok(trigamma_unchecked(x))
}

pub(crate) fn trigamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut acc = 0.0;
    while z < POLYGAMMA_SHIFT {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut term = inv2 * inv;
    for b in TRIGAMMA_SERIES {
        series += b * term;
        term *= inv2;
    }
    acc + inv + 0.5 * inv2 + series
}

/// Settings for the Newton iteration behind [`inverse_digamma`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunConfig {
    /// Stop once `|ψ(x) - y| <= newton_tol * max(1, |y|)`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for SpecFunConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-12,
            newton_max_iter: 100,
        }
    }
}

impl SpecFunConfig {
    pub fn new(newton_tol: f64, newton_max_iter: usize) -> Result<Self> {
        if !(newton_tol.is_finite() && newton_tol > 0.0) {
            return Err(Error::Domain(format!(
                "newton_tol must be positive, got {newton_tol}"
            )));
        }
        if newton_max_iter == 0 {
            return Err(Error::Domain("newton_max_iter must be at least 1".into()));
        }
        Ok(Self {
            newton_tol,
            newton_max_iter,
        })
    }
}

/// Inverse of the digamma function: the unique `x > 0` with `ψ(x) = y`.
///
/// Newton's method on ψ, started from `exp(y) + 1/2` when `y >= -2.22` and
/// from `-1/(y + γ)` otherwise. Since ψ is increasing and concave, every
/// iterate after the first approaches the root from below; a first step
/// that would leave the positive axis is replaced by halving.
pub fn inverse_digamma(y: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Domain(format!(
            "inverse_digamma requires a finite argument, got {y}"
        )));
    }
    let tol = cfg.newton_tol * y.abs().max(1.0);
    let mut x = if y >= -2.22 {
        y.exp() + 0.5
    } else {
        -1.0 / (y + EULER_GAMMA)
    };
    for _ in 0..cfg.newton_max_iter {
        let residual = digamma_unchecked(x) - y;
        if residual.abs() <= tol {
            return Ok(x);
        }
        let next = x - residual / trigamma_unchecked(x);
        x = if next > 0.0 { next } else { 0.5 * x };
    }
    if (digamma_unchecked(x) - y).abs() <= tol {
        return Ok(x);
    }
    Err(Error::Convergence {
        what: "inverse digamma",
        iterations: cfg.newton_max_iter,
        last: x,
    })
}

/// Regularized incomplete beta function I_x(a, b).
///
/// Evaluated with the modified Lentz continued fraction, using the
/// reflection I_x(a, b) = 1 - I_{1-x}(b, a) on the slowly converging side.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    check_positive(a, "regularized_incomplete_beta (a)")?;
    check_positive(b, "regularized_incomplete_beta (b)")?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "regularized_incomplete_beta requires 0 <= x <= 1, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma_unchecked(a + b) - ln_gamma_unchecked(a) - ln_gamma_unchecked(b)
        + a * x.ln()
        + b * (-x).ln_1p();
    let front = ln_front.exp();
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x)? / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x)? / b
    };
    Ok(value.clamp(0.0, 1.0))
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    const MAX_TERMS: usize = 500;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_TERMS {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::Convergence {
        what: "incomplete beta continued fraction",
        iterations: MAX_TERMS,
        last: h,
    })
}

/// Two-sided tail probability P(|T| >= |t|) of a Student-t variable.
pub fn student_t_two_sided(t: f64, dof: f64) -> Result<f64> {
    check_positive(dof, "student_t_two_sided (dof)")?;
    if t.is_nan() {
        return Err(Error::Domain("t statistic is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t))
}
