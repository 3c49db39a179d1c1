mod common;

use std::collections::BTreeMap;

use common::{gp, integrate};
use gamma_bayes::analysis::{bias, kl_matrix, paired_t_test};
use gamma_bayes::rng::rng_from_seed;
use gamma_bayes::specfun::{log_gamma, student_t_two_sided};
use gamma_bayes::{fit, sample, FitOptions, GammaParams, Method};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

/// Two-sided tail of Student's t by integrating its density from 0 to |t|.
fn t_tail_quadrature(t: f64, dof: f64) -> f64 {
    let ln_c = log_gamma((dof + 1.0) / 2.0).unwrap()
        - log_gamma(dof / 2.0).unwrap()
        - 0.5 * (dof * std::f64::consts::PI).ln();
    let density = |u: f64| (ln_c - (dof + 1.0) / 2.0 * (1.0 + u * u / dof).ln()).exp();
    1.0 - 2.0 * integrate(&density, 0.0, t.abs(), 1e-13, 16)
}

#[test]
fn p_values_match_quadrature() {
    let d = [1.1, 0.9, 1.2, 1.0, 0.8];
    let zeros = [0.0; 5];
    let r = paired_t_test(&d, &zeros).unwrap();
    assert_eq!(r.degrees_of_freedom, 4);
    assert!((r.t_statistic - 14.142).abs() < 0.01);
    let oracle = t_tail_quadrature(r.t_statistic, 4.0);
    assert!((r.p_value - 1.45e-4).abs() < 1e-5, "{}", r.p_value);
    assert!(
        (r.p_value - oracle).abs() < 1e-9,
        "{} vs {oracle}",
        r.p_value
    );

    for (t, dof) in [(0.3, 1.0), (1.7, 9.0), (2.5, 30.0), (-4.0, 199.0)] {
        let p = student_t_two_sided(t, dof).unwrap();
        let oracle = t_tail_quadrature(t, dof);
        assert!(
            (p - oracle).abs() < 1e-9,
            "t={t} dof={dof}: {p} vs {oracle}"
        );
    }
}

#[test]
fn null_rejection_rate_is_nominal() {
    let mut rng = rng_from_seed(2024);
    let rejections = (0..1000)
        .filter(|_| {
            let x: Vec<f64> = (0..30).map(|_| rng.sample(StandardNormal)).collect();
            let y: Vec<f64> = (0..30).map(|_| rng.sample(StandardNormal)).collect();
            paired_t_test(&x, &y).unwrap().p_value < 0.05
        })
        .count();
    let rate = rejections as f64 / 1000.0;
    assert!((0.03..=0.07).contains(&rate), "{rate}");
}

#[test]
fn ml1_bias_signs_at_small_n() {
    let truth = gp(2.0, 3.0);
    let pairs: Vec<(GammaParams, GammaParams)> = (0..500)
        .map(|seed| {
            let s = sample(&truth, 10, seed).unwrap();
            (
                truth,
                fit(&s, Method::Ml1, &FitOptions::default()).unwrap().params,
            )
        })
        .collect();
    let (shape, scale) = bias(Method::Ml1, 10, &pairs).unwrap();
    assert!(shape.mean_bias > 0.0, "{shape:?}");
    assert!(scale.mean_bias < 0.0, "{scale:?}");
}

#[test]
fn ml1_beats_mm_on_skewed_data() {
    let truth = gp(0.5, 1.0);
    let mut wins = 0;
    let (mut kl_ml1, mut kl_mm) = (0.0, 0.0);
    for seed in 0..200 {
        let s = sample(&truth, 20, seed).unwrap();
        let fits: BTreeMap<Method, GammaParams> = [Method::Mm, Method::Ml1]
            .into_iter()
            .map(|m| (m, fit(&s, m, &FitOptions::default()).unwrap().params))
            .collect();
        let kl = kl_matrix(&truth, &fits);
        if kl[&Method::Ml1] <= kl[&Method::Mm] {
            wins += 1;
        }
        kl_ml1 += kl[&Method::Ml1];
        kl_mm += kl[&Method::Mm];
    }
    // An independent simulation (numpy sampler, scipy root finder, 2000
    // replications) puts the per-replication win rate at 0.70 and the mean
    // KL ratio ML1/MM near 0.54.
    let rate = wins as f64 / 200.0;
    assert!((0.60..=0.80).contains(&rate), "{wins}/200");
    assert!(kl_ml1 < 0.75 * kl_mm, "{kl_ml1} vs {kl_mm}");
}

#[test]
fn kl_matrix_entries() {
    let truth = gp(2.0, 3.0);
    let fits = BTreeMap::from([
        (Method::Mm, truth),
        (Method::Ml1, gp(2.5, 2.0)),
        (Method::Ml2, gp(2.5, 2.0)),
    ]);
    let kl = kl_matrix(&truth, &fits);
    assert_eq!(kl[&Method::Mm], 0.0);
    assert_eq!(kl[&Method::Ml1], kl[&Method::Ml2]);
    assert!(kl[&Method::Ml1] > 0.0);
}

fn series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..40).prop_flat_map(|m| {
        (
            prop::collection::vec(-10.0f64..10.0, m),
            prop::collection::vec(-10.0f64..10.0, m),
        )
    })
}

proptest! {
    #[test]
    fn t_statistic_antisymmetric((x, y) in series()) {
        let xy = paired_t_test(&x, &y).unwrap();
        let yx = paired_t_test(&y, &x).unwrap();
        prop_assert_eq!(xy.t_statistic, -yx.t_statistic);
        prop_assert_eq!(xy.p_value, yx.p_value);
        prop_assert!((0.0..=1.0).contains(&xy.p_value));
        prop_assert_eq!(xy.degrees_of_freedom, x.len() - 1);
    }

    #[test]
    fn p_value_invariant_under_common_shift((x, y) in series(), c in -100.0f64..100.0) {
        let base = paired_t_test(&x, &y).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v + c).collect();
        let ys: Vec<f64> = y.iter().map(|v| v + c).collect();
        let shifted = paired_t_test(&xs, &ys).unwrap();
        prop_assert!((base.p_value - shifted.p_value).abs() <= 1e-9, "{} vs {}", base.p_value, shifted.p_value);
    }

    #[test]
    fn bias_permutation_invariant(
        pairs in prop::collection::vec((0.1f64..20.0, 0.1f64..20.0, 0.1f64..20.0, 0.1f64..20.0), 2..50),
        rotate in 0usize..50,
    ) {
        let pairs: Vec<(GammaParams, GammaParams)> =
            pairs.into_iter().map(|(a, b, c, d)| (gp(a, b), gp(c, d))).collect();
        let mut moved = pairs.clone();
        moved.reverse();
        let k = rotate % moved.len();
        moved.rotate_left(k);
        let (s1, c1) = bias(Method::Bl1, 10, &pairs).unwrap();
        let (s2, c2) = bias(Method::Bl1, 10, &moved).unwrap();
        for (u, v) in [(s1, s2), (c1, c2)] {
            prop_assert!((u.mean_bias - v.mean_bias).abs() <= 1e-12 * (1.0 + u.mean_bias.abs()));
            prop_assert!((u.sd_bias - v.sd_bias).abs() <= 1e-12 * (1.0 + u.sd_bias));
            prop_assert!(u.sd_bias >= 0.0);
        }
    }
}
