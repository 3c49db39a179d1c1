mod common;

use common::{gp, grid_golden_max};
use gamma_bayes::estimators::{
    bl1_update, bl2_update, fit_bl1, fit_bl2, fit_ml1, fit_ml2, ml1_update, ml2_update,
    rate_posterior,
};
use gamma_bayes::rng::{derive_seed, rng_from_seed};
use gamma_bayes::specfun::trigamma;
use gamma_bayes::{
    fit, fit_traced, profile_log_likelihood, sample, ConvergenceConfig, FitOptions, Method,
    RatePrior, Sample, ShapePriorBl1, ShapePriorBl2,
};
use proptest::prelude::*;
use rand::Rng;

fn cfg() -> ConvergenceConfig {
    ConvergenceConfig::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn profile_argmax(s: &Sample) -> f64 {
    grid_golden_max(|a| profile_log_likelihood(s, a).unwrap(), 1e-2, 1e3, 2000)
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi / lo).ln()).exp()
}

/// 100 seeded samples of size 1000 with log-uniform true parameters.
fn random_samples(tag: u64) -> Vec<Sample> {
    (0..100)
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(tag, &[i]));
            let a = log_uniform(&mut rng, 0.5, 20.0);
            let b = log_uniform(&mut rng, 0.1, 50.0);
            sample(&gp(a, b), 1000, rng.random()).unwrap()
        })
        .collect()
}

#[test]
fn ml_estimators_match_brute_force_maximizer() {
    let s = sample(&gp(2.0, 3.0), 10_000, 11).unwrap();
    let oracle = profile_argmax(&s);
    let ml1 = fit_ml1(&s, &cfg()).unwrap();
    let ml2 = fit_ml2(&s, &cfg()).unwrap();
    assert!(ml1.converged && ml2.converged);
    assert!(
        rel(ml1.params.shape(), oracle) <= 1e-4,
        "{} vs {oracle}",
        ml1.params.shape()
    );
    assert!(
        rel(ml2.params.shape(), oracle) <= 1e-4,
        "{} vs {oracle}",
        ml2.params.shape()
    );
    assert!(
        rel(ml1.params.shape(), ml2.params.shape())
            <= 10.0 * ml1_stop_error(ml2.params.shape(), 1e-6)
    );
    assert!(ml2.iterations < ml1.iterations);
    for r in [&ml1, &ml2] {
        assert!(rel(r.params.scale(), s.mean() / r.params.shape()) <= 1e-14);
    }
}

#[test]
fn ml_fixed_points() {
    let s = sample(&gp(2.0, 3.0), 10_000, 11).unwrap();
    let a1 = fit_ml1(&s, &cfg()).unwrap().params.shape();
    assert!(rel(ml1_update(&s, a1).unwrap(), a1) <= 1e-6);
    let a2 = fit_ml2(&s, &cfg()).unwrap().params.shape();
    assert!(rel(ml2_update(&s, a2).unwrap(), a2) <= 1e-6);
}

/// Relative distance to the fixed point left when ML1 stops on a step of
/// relative size `tol`. The map contracts by `ρ = 1/(αψ₁(α))` near the
/// maximizer, so the remaining error is at most `tol·ρ/(1-ρ)`.
fn ml1_stop_error(alpha: f64, tol: f64) -> f64 {
    let rho = 1.0 / (alpha * trigamma(alpha).unwrap());
    tol * (rho / (1.0 - rho)).max(1.0)
}

#[test]
fn ml1_and_ml2_agree_across_random_truths() {
    let tol = cfg().rel_tol;
    for s in random_samples(1) {
        let a1 = fit_ml1(&s, &cfg()).unwrap().params.shape();
        let a2 = fit_ml2(&s, &cfg()).unwrap().params.shape();
        assert!(
            rel(a1, a2) <= 10.0 * ml1_stop_error(a2, tol),
            "{a1} vs {a2}"
        );
    }
}

#[test]
fn ml1_and_ml2_share_the_maximizer() {
    let tight = ConvergenceConfig::new(1e-13, 100_000).unwrap();
    for s in random_samples(1).iter().take(20) {
        let a1 = fit_ml1(s, &tight).unwrap().params.shape();
        let a2 = fit_ml2(s, &tight).unwrap().params.shape();
        assert!(rel(a1, a2) <= 1e-9, "{a1} vs {a2}");
    }
}

#[test]
fn ml2_needs_fewer_iterations_than_ml1() {
    let truth = gp(2.0, 3.0);
    let fewer = (0..100)
        .filter(|&seed| {
            let s = sample(&truth, 10_000, seed).unwrap();
            fit_ml2(&s, &cfg()).unwrap().iterations < fit_ml1(&s, &cfg()).unwrap().iterations
        })
        .count();
    assert!(fewer >= 95, "{fewer}/100");
}

#[test]
fn ml1_profile_likelihood_never_decreases() {
    for s in random_samples(2).iter().take(30) {
        let (_, trace) = fit_traced(s, Method::Ml1, &FitOptions::default()).unwrap();
        for w in trace.windows(2) {
            let (l0, l1) = (
                profile_log_likelihood(s, w[0]).unwrap(),
                profile_log_likelihood(s, w[1]).unwrap(),
            );
            assert!(l1 >= l0 - 1e-9 * l0.abs().max(1.0), "{l0} -> {l1}");
        }
    }
}

#[test]
fn bl2_flat_prior_replays_ml2_iterates() {
    let opts = FitOptions {
        bl2_prior: ShapePriorBl2::flat(),
        ..FitOptions::default()
    };
    for s in random_samples(3).iter().take(30) {
        let (r2, ml2) = fit_traced(s, Method::Ml2, &opts).unwrap();
        let (rb, bl2) = fit_traced(s, Method::Bl2, &opts).unwrap();
        assert_eq!(ml2.len(), bl2.len());
        assert_eq!(r2.iterations, rb.iterations);
        for (x, y) in ml2.iter().zip(&bl2) {
            assert!(rel(*y, *x) <= 1e-12, "{x} vs {y}");
        }
    }
}

#[test]
fn bl2_flat_prior_close_to_ml2() {
    let s = sample(&gp(10.0, 25.0), 1000, 5).unwrap();
    let bl2 = fit_bl2(&s, &ShapePriorBl2::flat(), &RatePrior::default(), &cfg()).unwrap();
    let ml2 = fit_ml2(&s, &cfg()).unwrap();
    assert!(rel(bl2.params.shape(), ml2.params.shape()) <= 1e-3);
    assert!(rel(bl2.params.scale(), ml2.params.scale()) <= 1e-3);
    let a = bl2.params.shape();
    assert!(rel(bl2_update(&s, &ShapePriorBl2::flat(), a).unwrap(), a) <= 1e-6);
}

#[test]
fn bl1_close_to_ml1_with_vague_hyperparameters() {
    let s = sample(&gp(10.0, 25.0), 1000, 3).unwrap();
    let bl1 = fit_bl1(&s, &ShapePriorBl1::default(), &RatePrior::default(), &cfg()).unwrap();
    let ml1 = fit_ml1(&s, &cfg()).unwrap();
    assert!(rel(bl1.params.shape(), ml1.params.shape()) <= 1e-3);
    let a = bl1.params.shape();
    let again = bl1_update(&s, &ShapePriorBl1::default(), &RatePrior::default(), a).unwrap();
    assert!(rel(again, a) <= 1e-6);
}

#[test]
fn bl1_approaches_ml1_as_hyperparameters_vanish() {
    let tight = ConvergenceConfig::new(1e-12, 10_000).unwrap();
    for seed in [1, 2, 3] {
        let s = sample(&gp(3.0, 2.0), 50, seed).unwrap();
        let ml1 = fit_ml1(&s, &tight).unwrap().params.shape();
        let gaps: Vec<f64> = (1..=6)
            .map(|k| {
                let h = 10f64.powi(-k);
                let shape = ShapePriorBl1::new(0.0, h, h).unwrap();
                let rate = RatePrior::new(h, h).unwrap();
                (fit_bl1(&s, &shape, &rate, &tight).unwrap().params.shape() - ml1).abs()
            })
            .collect();
        for w in gaps.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "{gaps:?}");
        }
        assert!(gaps[5] < 1e-4 * ml1, "{gaps:?}");
    }
}

#[test]
fn bayes_scale_tends_to_ml_scale() {
    let s = sample(&gp(4.0, 2.5), 40, 9).unwrap();
    let alpha = 3.7;
    let target = s.mean() / alpha;
    let gaps: Vec<f64> = (0..8)
        .map(|k| {
            let h = 10f64.powi(-k);
            let post = rate_posterior(&RatePrior::new(h, h).unwrap(), &s, alpha);
            (post.scale() - target).abs()
        })
        .collect();
    for w in gaps.windows(2) {
        assert!(w[1] < w[0], "{gaps:?}");
    }
    assert!(gaps[7] / target < 1e-8);
}

#[test]
fn laplace_precision_positive() {
    for s in random_samples(4).iter().take(30) {
        for m in [Method::Bl1, Method::Bl2] {
            let r = fit(s, m, &FitOptions::default()).unwrap();
            assert!(r.converged);
            assert!(r.laplace_precision.unwrap() > 0.0);
        }
    }
}

#[test]
fn all_estimates_positive() {
    for s in random_samples(5) {
        for m in Method::ALL {
            let r = fit(&s, m, &FitOptions::default()).unwrap();
            assert!(r.params.shape() > 0.0 && r.params.scale() > 0.0, "{m}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn estimates_invariant_under_permutation(
        a in 0.3f64..20.0,
        b in 0.1f64..50.0,
        n in 5usize..200,
        seed in any::<u64>(),
        shuffle_seed in any::<u64>(),
    ) {
        let s = sample(&gp(a, b), n, seed).unwrap();
        let mut values = s.values().to_vec();
        let mut rng = rng_from_seed(shuffle_seed);
        for i in (1..values.len()).rev() {
            values.swap(i, rng.random_range(0..=i));
        }
        let shuffled = Sample::new(values).unwrap();
        for m in Method::ALL {
            let x = fit(&s, m, &FitOptions::default());
            let y = fit(&shuffled, m, &FitOptions::default());
            match (x, y) {
                (Ok(x), Ok(y)) => {
                    prop_assert!(rel(y.params.shape(), x.params.shape()) <= 1e-12, "{}: {:?} {:?}", m, x.params, y.params);
                    prop_assert!(rel(y.params.scale(), x.params.scale()) <= 1e-12);
                }
                (Err(e1), Err(e2)) => prop_assert_eq!(std::mem::discriminant(&e1), std::mem::discriminant(&e2)),
                (x, y) => prop_assert!(false, "{}: {:?} vs {:?}", m, x, y),
            }
        }
    }
}
