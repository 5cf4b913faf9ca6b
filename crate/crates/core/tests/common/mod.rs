//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of a smooth integrand.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Wrapped-normal density on S¹ with footprint `eta` and rate `sigma`,
/// normalized by quadrature.
pub fn s1_density(eta: f64, sigma: f64) -> impl Fn(f64) -> f64 {
    let z = 2.0 * integrate(|t| (-t * t / (2.0 * sigma * sigma)).exp(), 0.0, PI, 1e-15);
    move |theta| (-circ_dist(theta, eta).powi(2) / (2.0 * sigma * sigma)).exp() / z
}

/// `∫_lo^hi p_{η₁} − e^ε p_{η₂}` with η₁ = −Δ/2, η₂ = Δ/2, split at the
/// antipodes where the integrand has kinks.
pub fn s1_difference(sigma: f64, eps: f64, delta: f64, lo: f64, hi: f64) -> f64 {
    let p1 = s1_density(-delta / 2.0, sigma);
    let p2 = s1_density(delta / 2.0, sigma);
    let f = |t: f64| p1(t) - eps.exp() * p2(t);
    let mut cuts = vec![lo];
    for k in [PI - delta / 2.0, PI + delta / 2.0] {
        if k > lo && k < hi {
            cuts.push(k);
        }
    }
    cuts.push(hi);
    cuts.windows(2).map(|w| integrate(f, w[0], w[1], 1e-14)).sum()
}

/// The interval `[π + σ²ε/Δ, 2π − σ²ε/Δ]` used for the closed form.
pub fn closed_form_interval(sigma: f64, eps: f64, delta: f64) -> (f64, f64) {
    let s = sigma * sigma * eps / delta;
    (PI + s, 2.0 * PI - s)
}

/// The likelihood-ratio set `{θ : p_{η₁}(θ) / p_{η₂}(θ) ≥ e^ε}`, located by
/// direct comparison of squared distances on a fine grid and refined by
/// bisection at each boundary. For ε ≥ 0 it is a single arc inside [π, 2π].
pub fn likelihood_ratio_set(sigma: f64, eps: f64, delta: f64) -> Option<(f64, f64)> {
    let (e1, e2) = (-delta / 2.0, delta / 2.0);
    let inside = |t: f64| circ_dist(t, e2).powi(2) - circ_dist(t, e1).powi(2) >= 2.0 * sigma * sigma * eps;
    let n = 20_000;
    let grid: Vec<f64> = (0..=n).map(|i| PI + PI * i as f64 / n as f64).collect();
    let first = grid.iter().position(|&t| inside(t))?;
    let last = grid.iter().rposition(|&t| inside(t))?;
    let refine = |mut out: f64, mut inn: f64| {
        for _ in 0..100 {
            let mid = 0.5 * (out + inn);
            if inside(mid) {
                inn = mid;
            } else {
                out = mid;
            }
        }
        inn
    };
    let lo = if first == 0 { grid[0] } else { refine(grid[first - 1], grid[first]) };
    let hi = if last == n { grid[n] } else { refine(grid[last + 1], grid[last]) };
    Some((lo, hi))
}

/// Eq.-level privacy profile on S¹: the integrals over the likelihood-ratio set.
pub fn s1_true_profile(sigma: f64, eps: f64, delta: f64) -> f64 {
    match likelihood_ratio_set(sigma, eps, delta) {
        Some((lo, hi)) => s1_difference(sigma, eps, delta, lo, hi),
        None => 0.0,
    }
}

/// Same integrals over the closed-form interval.
pub fn s1_interval_profile(sigma: f64, eps: f64, delta: f64) -> f64 {
    let (lo, hi) = closed_form_interval(sigma, eps, delta);
    s1_difference(sigma, eps, delta, lo, hi)
}

/// (ε, σ) grid of the closed-form check: 20 ε values spanning
/// [0, πΔ/(2σ²)] for each σ ∈ {0.5, 1, 2}.
pub fn oracle_grid(delta: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for sigma in [0.5, 1.0, 2.0] {
        let eps_max = PI * delta / (2.0 * sigma * sigma);
        for i in 0..20 {
            out.push((eps_max * i as f64 / 19.0, sigma));
        }
    }
    out
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}
