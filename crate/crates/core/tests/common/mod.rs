//! Reference computations for the integration tests. None of these call into
//! the estimators; they only use the public density/special-function API or
//! plain arithmetic.

#![allow(dead_code)]

use gamma_bayes::{log_pdf, GammaParams};

/// Adaptive Simpson quadrature of `f` over `[a, b]`, first split into
/// `panels` equal pieces so that narrow peaks are not missed.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == panels { b } else { lo + h };
            simpson_panel(f, lo, hi, tol / panels as f64)
        })
        .sum()
}

fn simpson_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adapt(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integration range in `t = ln x` that carries all but ~1e-30 of the mass of `p`.
fn log_range(p: &GammaParams) -> (f64, f64) {
    let (a, b) = (p.shape(), p.scale());
    let lo = b * (1e-30f64).powf(1.0 / a).max(1e-300);
    let hi = b * (a + 40.0 * a.sqrt() + 60.0);
    (lo.ln(), hi.ln())
}

/// `E_p[g(X)]` by quadrature in `t = ln x`.
pub fn expectation<G: Fn(f64) -> f64>(p: &GammaParams, g: G, tol: f64) -> f64 {
    let (lo, hi) = log_range(p);
    let integrand = |t: f64| {
        let x = t.exp();
        let lp = log_pdf(x, p).unwrap();
        (lp + t).exp() * g(x)
    };
    integrate(&integrand, lo, hi, tol, 256)
}

/// KL(p ‖ q) = E_p[log p - log q] by quadrature.
pub fn kl_quadrature(p: &GammaParams, q: &GammaParams) -> f64 {
    expectation(
        p,
        |x| log_pdf(x, p).unwrap() - log_pdf(x, q).unwrap(),
        1e-11,
    )
}

/// Mass of `p` on `(0, upper]` by quadrature.
pub fn mass_below(p: &GammaParams, upper: f64) -> f64 {
    let (lo, _) = log_range(p);
    let integrand = |t: f64| (log_pdf(t.exp(), p).unwrap() + t).exp();
    integrate(&integrand, lo, upper.ln(), 1e-11, 256)
}

/// Model CDF at each of `sorted` (ascending) values, accumulated panel by panel.
pub fn cdf_at_sorted(p: &GammaParams, sorted: &[f64]) -> Vec<f64> {
    let (lo, _) = log_range(p);
    let integrand = |t: f64| (log_pdf(t.exp(), p).unwrap() + t).exp();
    let mut acc = 0.0;
    let mut prev = lo;
    sorted
        .iter()
        .map(|&x| {
            let t = x.ln();
            if t > prev {
                acc += integrate(&integrand, prev, t, 1e-12, 1);
                prev = t;
            }
            acc
        })
        .collect()
}

/// Kolmogorov–Smirnov distance between a sample and model CDF values at its sorted points.
pub fn ks_statistic(cdf: &[f64]) -> f64 {
    let n = cdf.len() as f64;
    cdf.iter()
        .enumerate()
        .map(|(i, &f)| {
            let i = i as f64;
            (f - i / n).abs().max(((i + 1.0) / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Maximizes `f` over `[lo, hi]` by a log-spaced grid scan followed by
/// golden-section search in the bracket around the best grid point.
pub fn grid_golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid: usize) -> f64 {
    let step = (hi / lo).ln() / (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid).map(|i| lo * (step * i as f64).exp()).collect();
    let best = (0..grid)
        .max_by(|&i, &j| f(xs[i]).total_cmp(&f(xs[j])))
        .unwrap();
    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(grid - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > 1e-13 * b {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Central finite difference.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn gp(a: f64, b: f64) -> GammaParams {
    GammaParams::new(a, b).unwrap()
}
