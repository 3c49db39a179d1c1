//! Monte Carlo replication harness.
//!
//! Every `(n, replication)` cell gets its own seed derived from the master
//! seed, draws true parameters log-uniformly, generates one sample and fits
//! every requested method on that same sample.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng as _, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{bias, paired_t_test, BiasSummary, PairedTestResult};
use crate::error::{Error, Result};
use crate::estimators::{fit, FitOptions, Method};
use crate::io::{de_f64, ser_f64};
use crate::model::{kl_divergence, sample, GammaParams, Sample};
use crate::rng::{derive_seed, rng_from_seed};

/// Redraws allowed per replication before the experiment aborts.
pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub methods: Vec<Method>,
    /// `(lo, hi)` bounds of the log-uniform true shape.
    pub shape_range: (f64, f64),
    /// `(lo, hi)` bounds of the log-uniform true scale.
    pub scale_range: (f64, f64),
    pub fit: FitOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sample_sizes: vec![10, 100, 1000],
            replications: 500,
            master_seed: 0,
            methods: Method::ALL.to_vec(),
            shape_range: (0.5, 20.0),
            scale_range: (0.1, 50.0),
            fit: FitOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_sizes.is_empty() {
            return Err(Error::Domain("at least one sample size is required".into()));
        }
        if let Some(n) = self.sample_sizes.iter().find(|&&n| n < 2) {
            return Err(Error::Domain(format!(
                "sample sizes must be at least 2, got {n}"
            )));
        }
        if self.replications == 0 {
            return Err(Error::Domain("replications must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Domain("at least one method is required".into()));
        }
        for (name, (lo, hi)) in [("shape", self.shape_range), ("scale", self.scale_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::Domain(format!(
                    "{name} range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }

    /// Methods in canonical order without duplicates.
    fn canonical_methods(&self) -> Vec<Method> {
        let mut m = self.methods.clone();
        m.sort();
        m.dedup();
        m
    }
}

/// One method's outcome on one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub method: Method,
    pub n: usize,
    pub replication_index: usize,
    pub seed: u64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub true_shape: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub true_scale: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub est_shape: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub est_scale: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub kl: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub wall_time_seconds: f64,
}

impl ExperimentRecord {
    pub fn truth(&self) -> Result<GammaParams> {
        GammaParams::new(self.true_shape, self.true_scale)
    }

    pub fn estimate(&self) -> Result<GammaParams> {
        GammaParams::new(self.est_shape, self.est_scale)
    }
}

/// A replication whose first sample was unusable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedrawDiagnostic {
    pub n: usize,
    pub replication_index: usize,
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentOutput {
    /// Ordered by `(n, replication_index, method)`.
    pub records: Vec<ExperimentRecord>,
    pub redraws: Vec<RedrawDiagnostic>,
}

/// Seed of replication `rep` at sample size `n`.
pub fn replication_seed(master_seed: u64, n: usize, rep: usize) -> u64 {
    derive_seed(master_seed, &[n as u64, rep as u64])
}

fn log_uniform(rng: &mut crate::rng::Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        return lo;
    }
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn usable(s: &Sample) -> bool {
    s.len() >= 2 && s.variance() > 0.0 && s.mean_log() < s.mean().ln()
}

struct Replication {
    seed: u64,
    truth: GammaParams,
    sample: Sample,
    redraws: usize,
}

fn draw_replication(cfg: &ExperimentConfig, n: usize, rep: usize) -> Result<Replication> {
    let seed = replication_seed(cfg.master_seed, n, rep);
    for redraw in 0..=MAX_REDRAWS {
        let sub_seed = if redraw == 0 {
            seed
        } else {
            derive_seed(seed, &[redraw as u64])
        };
        let mut rng = rng_from_seed(sub_seed);
        let truth = GammaParams::new(
            log_uniform(&mut rng, cfg.shape_range),
            log_uniform(&mut rng, cfg.scale_range),
        )?;
        let s = sample(&truth, n, rng.next_u64())?;
        if usable(&s) {
            return Ok(Replication {
                seed,
                truth,
                sample: s,
                redraws: redraw,
            });
        }
    }
    Err(Error::DegenerateSample(format!(
        "replication {rep} at n = {n} stayed degenerate after {MAX_REDRAWS} redraws"
    )))
}

fn run_replication(
    cfg: &ExperimentConfig,
    methods: &[Method],
    n: usize,
    rep: usize,
    timed: bool,
) -> Result<(Vec<ExperimentRecord>, usize)> {
    let r = draw_replication(cfg, n, rep)?;
    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let start = timed.then(Instant::now);
        let res = fit(&r.sample, method, &cfg.fit)?;
        let wall = start.map_or(0.0, |t| t.elapsed().as_secs_f64());
        out.push(ExperimentRecord {
            method,
            n,
            replication_index: rep,
            seed: r.seed,
            true_shape: r.truth.shape(),
            true_scale: r.truth.scale(),
            est_shape: res.params.shape(),
            est_scale: res.params.scale(),
            kl: kl_divergence(&r.truth, &res.params),
            iterations: res.iterations,
            converged: res.converged,
            wall_time_seconds: wall,
        });
    }
    Ok((out, r.redraws))
}

/// Records and redraw count of one `(n, replication)` cell.
type CellResult = ((usize, usize), (Vec<ExperimentRecord>, usize));

fn collect(cells: Vec<CellResult>) -> ExperimentOutput {
    let mut out = ExperimentOutput::default();
    for ((n, rep), (records, redraws)) in cells {
        out.records.extend(records);
        if redraws > 0 {
            out.redraws.push(RedrawDiagnostic {
                n,
                replication_index: rep,
                redraws,
            });
        }
    }
    out.records.sort_by(|a, b| {
        (a.n, a.replication_index, a.method).cmp(&(b.n, b.replication_index, b.method))
    });
    out.redraws.sort_by_key(|r| (r.n, r.replication_index));
    out
}

fn cells(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    cfg.sample_sizes
        .iter()
        .flat_map(|&n| (0..cfg.replications).map(move |rep| (n, rep)))
        .collect()
}

/// Bias study. Replications run in parallel; output is independent of
/// scheduling. `wall_time_seconds` is left at zero.
pub fn run_bias_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let methods = cfg.canonical_methods();
    let results = cells(cfg)
        .into_par_iter()
        .map(|(n, rep)| run_replication(cfg, &methods, n, rep, false).map(|r| ((n, rep), r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(results))
}

/// Timing study: the same replications as [`run_bias_experiment`], run
/// sequentially, with wall-clock time measured around each fit call only.
pub fn run_timing_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let methods = cfg.canonical_methods();
    let results = cells(cfg)
        .into_iter()
        .map(|(n, rep)| run_replication(cfg, &methods, n, rep, true).map(|r| ((n, rep), r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(results))
}

fn group(records: &[ExperimentRecord]) -> BTreeMap<(usize, Method), Vec<&ExperimentRecord>> {
    let mut g: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for r in records {
        g.entry((r.n, r.method)).or_default().push(r);
    }
    for v in g.values_mut() {
        v.sort_by_key(|r| r.replication_index);
    }
    g
}

/// Shape and scale bias per `(n, method)`; groups with fewer than two
/// replications are skipped.
pub fn bias_summaries(records: &[ExperimentRecord]) -> Result<Vec<BiasSummary>> {
    let mut out = Vec::new();
    for ((n, method), rs) in group(records) {
        if rs.len() < 2 {
            continue;
        }
        let pairs = rs
            .iter()
            .map(|r| Ok((r.truth()?, r.estimate()?)))
            .collect::<Result<Vec<_>>>()?;
        let (shape, scale) = bias(method, n, &pairs)?;
        out.push(shape);
        out.push(scale);
    }
    Ok(out)
}

/// Paired t-tests on KL between every pair of methods at each `n`,
/// matched by replication index.
pub fn kl_paired_tests(records: &[ExperimentRecord]) -> Result<Vec<PairedTestResult>> {
    let groups = group(records);
    let mut by_n: BTreeMap<usize, Vec<Method>> = BTreeMap::new();
    for &(n, m) in groups.keys() {
        by_n.entry(n).or_default().push(m);
    }
    let mut out = Vec::new();
    for (n, methods) in by_n {
        for (i, &a) in methods.iter().enumerate() {
            for &b in &methods[i + 1..] {
                let ra = &groups[&(n, a)];
                let rb = &groups[&(n, b)];
                if ra.len() < 2 || ra.len() != rb.len() {
                    continue;
                }
                if ra
                    .iter()
                    .zip(rb.iter())
                    .any(|(x, y)| x.replication_index != y.replication_index)
                {
                    return Err(Error::Domain(format!(
                        "replications of {a} and {b} at n = {n} do not line up"
                    )));
                }
                let ka: Vec<f64> = ra.iter().map(|r| r.kl).collect();
                let kb: Vec<f64> = rb.iter().map(|r| r.kl).collect();
                let t = paired_t_test(&ka, &kb)?;
                out.push(PairedTestResult {
                    method_a: a,
                    method_b: b,
                    n,
                    t_statistic: t.t_statistic,
                    degrees_of_freedom: t.degrees_of_freedom,
                    p_value: t.p_value,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub method: Method,
    pub n: usize,
    pub replications: usize,
    pub median_iterations: f64,
    pub median_wall_time_seconds: f64,
}

pub fn median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty(), "median of an empty slice");
    xs.sort_by(|a, b| a.total_cmp(b));
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        0.5 * (xs[mid - 1] + xs[mid])
    }
}

pub fn timing_summaries(records: &[ExperimentRecord]) -> Vec<TimingSummary> {
    group(records)
        .into_iter()
        .map(|((n, method), rs)| {
            let mut its: Vec<f64> = rs.iter().map(|r| r.iterations as f64).collect();
            let mut wall: Vec<f64> = rs.iter().map(|r| r.wall_time_seconds).collect();
            TimingSummary {
                method,
                n,
                replications: rs.len(),
                median_iterations: median(&mut its),
                median_wall_time_seconds: median(&mut wall),
            }
        })
        .collect()
}
