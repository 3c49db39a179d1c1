//! Log-prior and log-posterior curves of the BL1 shape prior.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    bl1_log_prior, fit_bl1, ConvergenceConfig, FitResult, Posterior, RatePrior, ShapePriorBl1,
};
use crate::io::{de_f64, ser_f64};
use crate::model::Sample;

pub const DEFAULT_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub alpha: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub log_prior: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub log_posterior: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    pub points: Vec<CurvePoint>,
    /// The BL1 fit whose rate estimate both curves are conditioned on.
    pub fit: FitResult,
}

impl Curves {
    /// Grid value with the largest log-posterior.
    pub fn posterior_argmax(&self) -> f64 {
        self.points
            .iter()
            .max_by(|a, b| a.log_posterior.total_cmp(&b.log_posterior))
            .map(|p| p.alpha)
            .expect("curves are never empty")
    }
}

/// `k` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, k: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) || k < 2 {
        return Err(Error::Domain(format!(
            "log grid needs 0 < lo < hi and at least 2 points, got ({lo}, {hi}, {k})"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (k - 1) as f64;
    Ok((0..k)
        .map(|i| {
            if i == k - 1 {
                hi
            } else {
                (a + step * i as f64).exp()
            }
        })
        .collect())
}

/// Default grid: 512 log-spaced points spanning one decade either side of
/// the moment estimate of the shape.
pub fn default_grid(s: &Sample) -> Result<Vec<f64>> {
    let centre = crate::estimators::fit_mm(s)?.params.shape();
    log_spaced(centre / 10.0, centre * 10.0, DEFAULT_GRID_POINTS)
}

/// Evaluates the prior and posterior log-densities of the shape over
/// `grid`, both at the rate `R = d̂/ê` of the BL1 fit to `s`. Each column
/// is shifted so its maximum over the grid is zero.
pub fn emit_prior_posterior_curves(
    shape_prior: &ShapePriorBl1,
    rate_prior: &RatePrior,
    s: &Sample,
    grid: &[f64],
    cfg: &ConvergenceConfig,
) -> Result<Curves> {
    if grid.is_empty() {
        return Err(Error::Domain("curve grid is empty".into()));
    }
    if grid.iter().any(|&a| !(a.is_finite() && a > 0.0)) {
        return Err(Error::Domain(
            "curve grid values must be finite and > 0".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "curve grid must be strictly increasing".into(),
        ));
    }
    let fit = fit_bl1(s, shape_prior, rate_prior, cfg)?;
    let Some(Posterior::Bl1 {
        d_hat,
        e_hat,
        log_a_hat,
        b_hat,
        c_hat,
    }) = fit.posterior
    else {
        unreachable!("BL1 fits always carry a BL1 posterior");
    };
    let posterior = ShapePriorBl1 {
        log_a: log_a_hat,
        b: b_hat,
        c: c_hat,
    };
    let rate = d_hat / e_hat;
    let mut points = grid
        .iter()
        .map(|&alpha| {
            Ok(CurvePoint {
                alpha,
                log_prior: bl1_log_prior(alpha, shape_prior, rate)?,
                log_posterior: bl1_log_prior(alpha, &posterior, rate)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_prior = points
        .iter()
        .map(|p| p.log_prior)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_post = points
        .iter()
        .map(|p| p.log_posterior)
        .fold(f64::NEG_INFINITY, f64::max);
    for p in &mut points {
        p.log_prior -= max_prior;
        p.log_posterior -= max_post;
    }
    Ok(Curves { points, fit })
}
