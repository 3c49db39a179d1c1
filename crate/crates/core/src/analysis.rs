//! Post-processing of experiment replications: bias summaries, KL tables
//! and paired t-tests.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::model::{kl_divergence, GammaParams};
use crate::specfun::student_t_two_sided;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Shape,
    Scale,
}

impl Param {
    pub fn as_str(&self) -> &'static str {
        match self {
            Param::Shape => "shape",
            Param::Scale => "scale",
        }
    }
}

/// Mean and unbiased standard deviation of `estimate - truth` for one
/// parameter over a set of replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSummary {
    pub method: Method,
    pub n: usize,
    pub param: Param,
    pub mean_bias: f64,
    pub sd_bias: f64,
    pub replications: usize,
}

/// Outcome of a two-sided paired t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t_statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// A paired t-test between two methods' per-replication KL values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult {
    pub method_a: Method,
    pub method_b: Method,
    pub n: usize,
    pub t_statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Mean and unbiased (divisor `len - 1`) standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

/// Shape and scale bias of `(truth, estimate)` pairs.
pub fn bias(
    method: Method,
    n: usize,
    pairs: &[(GammaParams, GammaParams)],
) -> Result<(BiasSummary, BiasSummary)> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "bias needs at least 2 replications, got {}",
            pairs.len()
        )));
    }
    let summarize = |param: Param, get: fn(&GammaParams) -> f64| {
        let diffs: Vec<f64> = pairs.iter().map(|(t, e)| get(e) - get(t)).collect();
        let (mean_bias, sd_bias) = mean_sd(&diffs);
        BiasSummary {
            method,
            n,
            param,
            mean_bias,
            sd_bias,
            replications: pairs.len(),
        }
    };
    Ok((
        summarize(Param::Shape, GammaParams::shape),
        summarize(Param::Scale, GammaParams::scale),
    ))
}

/// Two-sided paired t-test on `x - y`.
///
/// When the differences have zero spread the p-value is 1 if their mean is
/// also zero and 0 otherwise.
pub fn paired_t_test(x: &[f64], y: &[f64]) -> Result<TTest> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "paired series differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(
            "a paired t-test needs at least 2 pairs".into(),
        ));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let dof = d.len() - 1;
    let (mean, sd) = mean_sd(&d);
    if sd == 0.0 {
        let (t_statistic, p_value) = if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        };
        return Ok(TTest {
            t_statistic,
            degrees_of_freedom: dof,
            p_value,
        });
    }
    let t = mean / (sd / (d.len() as f64).sqrt());
    Ok(TTest {
        t_statistic: t,
        degrees_of_freedom: dof,
        p_value: student_t_two_sided(t, dof as f64)?,
    })
}

/// `KL(truth ‖ fit)` for every fitted method.
pub fn kl_matrix(
    truth: &GammaParams,
    fits: &BTreeMap<Method, GammaParams>,
) -> BTreeMap<Method, f64> {
    fits.iter()
        .map(|(m, p)| (*m, kl_divergence(truth, p)))
        .collect()
}
