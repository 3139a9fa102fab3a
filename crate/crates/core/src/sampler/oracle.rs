//! Brute-force numerical evidence, used to check the closed-form algebra.

use std::f64::consts::PI;

use crate::data::Dataset;
use crate::error::Result;
use crate::tree::{RegressionTree, SuffStatMap};

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    m: f64,
    fm: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let (left, lm, flm) = simpson(f, a, fa, m, fm);
    let (right, rm, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, fa, m, fm, left, lm, flm, eps / 2.0, depth - 1)
        + adaptive(f, m, fm, b, fb, right, rm, frm, eps / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    adaptive(f, a, fa, b, fb, whole, m, fm, eps, 50)
}

/// Maximizer of a unimodal `g` on `[lo, hi]` by golden-section search.
fn golden_max(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if gc > gd {
            hi = d;
            d = c;
            gd = gc;
            c = hi - r * (hi - lo);
            gc = g(c);
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + r * (hi - lo);
            gd = g(d);
        }
    }
    0.5 * (lo + hi)
}

/// `log ∫ Π_i N(r_i; μ, σ²) N(μ; μ0, τ²) dμ` for one leaf, evaluated
/// numerically with every normalizing constant kept.
pub fn leaf_log_evidence(residuals: &[f64], sigma: f64, tau: f64, mu0: f64) -> f64 {
    let log_norm = |x: f64, mean: f64, sd: f64| -0.5 * (2.0 * PI * sd * sd).ln() - (x - mean).powi(2) / (2.0 * sd * sd);
    let g = |mu: f64| {
        residuals.iter().map(|&r| log_norm(r, mu, sigma)).sum::<f64>() + log_norm(mu, mu0, tau)
    };
    let spread = sigma + tau;
    let lo = residuals.iter().copied().fold(mu0, f64::min) - 10.0 * spread;
    let hi = residuals.iter().copied().fold(mu0, f64::max) + 10.0 * spread;
    let mode = golden_max(&g, lo, hi);
    let g_mode = g(mode);
    // width from a finite-difference curvature estimate
    let h = 1e-3 * spread;
    let curv = -(g(mode + h) - 2.0 * g_mode + g(mode - h)) / (h * h);
    let w = if curv > 0.0 { 1.0 / curv.sqrt() } else { spread };
    let f = |mu: f64| (g(mu) - g_mode).exp();
    let integral = integrate(&f, mode - 40.0 * w, mode + 40.0 * w, 1e-14 * w);
    g_mode + integral.ln()
}

/// Log marginal likelihood of residuals `residual` under tree `t`, with the
/// leaf jumps integrated out numerically one leaf at a time.
pub fn quadrature_marginal_oracle(
    t: &RegressionTree,
    data: &Dataset,
    residual: &[f64],
    sigma: f64,
    tau_leaf: f64,
    mu0: f64,
) -> Result<f64> {
    let ssm = SuffStatMap::from_tree(t, data)?;
    let mut total = 0.0;
    for (_, idx) in ssm.iter() {
        let r: Vec<f64> = idx.iter().map(|&i| residual[i]).collect();
        total += leaf_log_evidence(&r, sigma, tau_leaf, mu0);
    }
    Ok(total)
}
