use super::{FitResult, Method};
use crate::error::{Error, Result};
use crate::model::{GammaParams, Sample};

pub(super) fn mm_shape(s: &Sample) -> Result<f64> {
    if s.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "moment matching needs at least 2 observations, got {}",
            s.len()
        )));
    }
    let v = s.variance();
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::DegenerateSample(format!(
            "sample variance is {v}; all observations are equal"
        )));
    }
    Ok(s.mean() * s.mean() / v)
}

/// Method of moments: `α = x̄²/v`, `β = v/x̄`.
pub fn fit_mm(s: &Sample) -> Result<FitResult> {
    let shape = mm_shape(s)?;
    let scale = s.variance() / s.mean();
    Ok(FitResult {
        params: GammaParams::new(shape, scale)?,
        method: Method::Mm,
        iterations: 0,
        converged: true,
        posterior: None,
        laplace_precision: None,
        safeguard_steps: 0,
    })
}
