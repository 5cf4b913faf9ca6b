//! Privacy budget μ of the Riemannian Gaussian mechanism with rate σ.
//!
//! Three routes, all reducing to "find the smallest μ whose GDP profile
//! δ_μ(ε) dominates the mechanism's privacy profile on an ε grid":
//!
//! * ℝᵈ: closed form μ = Δ/σ;
//! * S¹: the profile `h(σ, ε, Δ)` in closed form ([`h_s1`]);
//! * any constant-curvature space: Monte-Carlo estimates of the two
//!   integrals over `A = {y : d(η′, y)² − d(η, y)² ≥ 2σ²ε}` for a single pair
//!   `d(η, η′) = Δ`, which suffices because the isometry group moves any
//!   such pair onto any other.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gdp::{self, delta_mu_unchecked, solve_mu, PrivacyBudget, Spread};
use crate::manifold::{ManifoldKind, ManifoldSpec, Point};
use crate::samplers::{sample_gaussian, ChainConfig, RiemannianGaussian, SamplerChoice};
use crate::seed;
use crate::special::normal_cdf;

pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_N_EPS: usize = 1000;
pub const DEFAULT_M: usize = 100;

const SEED_TAG_PAIR: &str = "calibrate/footprints";
const SEED_TAG_REPLICATE: &str = "calibrate/replicate";

/// Inputs of the Monte-Carlo calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationConfig {
    /// Global sensitivity Δ.
    pub delta_sens: f64,
    /// Rate σ of the Gaussian mechanism.
    pub sigma: f64,
    /// Draws per distribution per replicate.
    pub n: usize,
    /// Size of the ε grid.
    pub n_eps: usize,
    /// Largest ε on the grid; `None` picks [`default_eps_max`].
    pub eps_max: Option<f64>,
    /// Number of replicates averaged.
    pub m: usize,
    pub seed: u64,
    pub sampler: SamplerChoice,
    pub chain: ChainConfig,
}

impl CalibrationConfig {
    pub fn new(delta_sens: f64, sigma: f64, seed: u64) -> Self {
        CalibrationConfig {
            delta_sens,
            sigma,
            n: DEFAULT_N,
            n_eps: DEFAULT_N_EPS,
            eps_max: None,
            m: DEFAULT_M,
            seed,
            sampler: SamplerChoice::Auto,
            chain: ChainConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("delta", self.delta_sens)?;
        positive("sigma", self.sigma)?;
        for (name, v) in [("n", self.n), ("n_eps", self.n_eps), ("m", self.m)] {
            if v == 0 {
                return Err(Error::param(name, "must be at least 1"));
            }
        }
        if let Some(e) = self.eps_max {
            positive("eps_max", e)?;
        }
        self.chain.validate()
    }

    pub fn resolved_eps_max(&self, manifold: &ManifoldSpec) -> f64 {
        self.eps_max
            .unwrap_or_else(|| default_eps_max(manifold, self.delta_sens, self.sigma))
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} must be positive and finite")))
    }
}

fn check_circle_sensitivity(delta_sens: f64) -> Result<()> {
    if delta_sens > 0.0 && delta_sens <= PI {
        Ok(())
    } else {
        Err(Error::param("delta", format!("{delta_sens} must lie in (0, π] on the circle")))
    }
}

/// πΔ/(2σ²) on the circle, where the profile vanishes beyond it; elsewhere
/// max{10, 5/σ + Δ²/(2σ²)}.
pub fn default_eps_max(manifold: &ManifoldSpec, delta_sens: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    match manifold.kind() {
        ManifoldKind::Circle => PI * delta_sens / (2.0 * s2),
        _ => f64::max(10.0, 5.0 / sigma + delta_sens * delta_sens / (2.0 * s2)),
    }
}

/// `{k, 2k, …, n_eps·k}` with `k = eps_max / n_eps`; the last point is
/// `eps_max` exactly.
pub fn eps_grid(eps_max: f64, n_eps: usize) -> Vec<f64> {
    (1..=n_eps)
        .map(|i| eps_max * i as f64 / n_eps as f64)
        .collect()
}

/// A privacy-profile estimate `l_ε` over an ε grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsCurve {
    pub eps: Vec<f64>,
    pub l: Vec<f64>,
    /// Standard error of each `l_ε` across replicates (Monte Carlo only).
    pub se: Option<Vec<f64>>,
}

impl EpsCurve {
    /// max over the grid of the μ solving δ_μ(ε) = l_ε; nonpositive `l_ε`
    /// contributes 0.
    pub fn mu(&self) -> Result<f64> {
        mu_from_profile(&self.eps, &self.l)
    }
}

/// `max_ε solve_mu(ε, l_ε)`.
pub fn mu_from_profile(eps: &[f64], l: &[f64]) -> Result<f64> {
    let mut best = 0.0f64;
    for (&e, &target) in eps.iter().zip(l) {
        if target <= 0.0 {
            continue;
        }
        // δ_μ(ε) is increasing in μ, so this ε cannot raise the maximum
        if best > 0.0 && delta_mu_unchecked(best, e) >= target {
            continue;
        }
        if target >= 1.0 {
            return Err(Error::Numerical(format!(
                "profile estimate {target} at ε = {e} admits no finite μ"
            )));
        }
        best = best.max(solve_mu(e, target)?);
    }
    Ok(best)
}

/// C(σ) = Φ(π/σ) − Φ(−π/σ).
pub fn s1_mass(sigma: f64) -> f64 {
    normal_cdf(PI / sigma) - normal_cdf(-PI / sigma)
}

/// Closed-form privacy profile of the Riemannian Gaussian mechanism on S¹,
/// defined for ε ∈ [0, πΔ/(2σ²)].
pub fn h_s1(sigma: f64, eps: f64, delta_sens: f64) -> Result<f64> {
    positive("sigma", sigma)?;
    check_circle_sensitivity(delta_sens)?;
    let eps_max = PI * delta_sens / (2.0 * sigma * sigma);
    if !(eps >= 0.0 && eps <= eps_max * (1.0 + 1e-12)) {
        return Err(Error::param(
            "eps",
            format!("{eps} outside the admissible range [0, {eps_max}]"),
        ));
    }
    let eps = eps.min(eps_max);
    let c = s1_mass(sigma);
    let e = eps.exp();
    let a = sigma * eps / delta_sens;
    let b = delta_sens / (2.0 * sigma);
    let w = PI / sigma;
    let near = eps <= delta_sens * delta_sens / (2.0 * sigma * sigma);

    let main = normal_cdf(-a + b) - e * normal_cdf(-a - b);
    let wrap_shift = if near { w } else { -w };
    let wrapped = normal_cdf(a + b - w) - e * normal_cdf(a - b + wrap_shift);
    let mut h = (main - wrapped) / c;
    if near {
        h -= e;
    }
    Ok(h)
}

/// μ = Δ/σ.
pub fn calibrate_euclidean(delta_sens: f64, sigma: f64) -> Result<PrivacyBudget> {
    positive("delta", delta_sens)?;
    positive("sigma", sigma)?;
    PrivacyBudget::closed_form(delta_sens / sigma)
}

/// The closed-form S¹ profile on the grid up to πΔ/(2σ²).
pub fn s1_curve(delta_sens: f64, sigma: f64, n_eps: usize) -> Result<EpsCurve> {
    check_circle_sensitivity(delta_sens)?;
    positive("sigma", sigma)?;
    if n_eps == 0 {
        return Err(Error::param("n_eps", "must be at least 1"));
    }
    let eps = eps_grid(PI * delta_sens / (2.0 * sigma * sigma), n_eps);
    let l = eps
        .iter()
        .map(|&e| h_s1(sigma, e, delta_sens))
        .collect::<Result<Vec<_>>>()?;
    Ok(EpsCurve { eps, l, se: None })
}

/// Exact budget on S¹ from the closed-form profile.
pub fn calibrate_s1(delta_sens: f64, sigma: f64, n_eps: usize) -> Result<PrivacyBudget> {
    gdp::ensure_profile_monotone()?;
    PrivacyBudget::analytic_s1(s1_curve(delta_sens, sigma, n_eps)?.mu()?)
}

/// Result of [`calibrate_mcmc`].
#[derive(Debug, Clone, PartialEq)]
pub struct McmcCalibration {
    /// μ from the replicate-averaged profile, with the spread of the
    /// per-replicate budgets.
    pub budget: PrivacyBudget,
    /// Replicate-averaged profile and its standard error.
    pub curve: EpsCurve,
    /// μ computed from each replicate's profile alone.
    pub replicate_mu: Vec<f64>,
    /// The footprint pair `(η, η′)` with `d(η, η′) = Δ`.
    pub footprints: (Point, Point),
}

/// Monte-Carlo budget on a constant-curvature space.
///
/// Replicates run in parallel on streams derived from `cfg.seed` and the
/// replicate index, so the result does not depend on scheduling.
pub fn calibrate_mcmc(manifold: &ManifoldSpec, cfg: &CalibrationConfig) -> Result<McmcCalibration> {
    cfg.validate()?;
    gdp::ensure_profile_monotone()?;
    if cfg.delta_sens >= manifold.injectivity_radius() {
        return Err(Error::param(
            "delta",
            format!(
                "{} must be below the injectivity radius {}",
                cfg.delta_sens,
                manifold.injectivity_radius()
            ),
        ));
    }
    let eps = eps_grid(cfg.resolved_eps_max(manifold), cfg.n_eps);

    let mut pair_rng = seed::stream(cfg.seed, SEED_TAG_PAIR, 0);
    let eta = manifold.random_point(&mut pair_rng);
    let eta_prime = manifold.random_point_at_distance(&eta, cfg.delta_sens, &mut pair_rng)?;
    let near = RiemannianGaussian::new(*manifold, eta.clone(), cfg.sigma)?;
    let far = RiemannianGaussian::new(*manifold, eta_prime.clone(), cfg.sigma)?;

    let per_replicate: Vec<Vec<f64>> = (0..cfg.m)
        .into_par_iter()
        .map(|j| {
            let mut rng = seed::stream(cfg.seed, SEED_TAG_REPLICATE, j as u64);
            let ys = sample_gaussian(&near, cfg.n, cfg.sampler, &cfg.chain, &mut rng)?;
            let ys_prime = sample_gaussian(&far, cfg.n, cfg.sampler, &cfg.chain, &mut rng)?;
            let d = sorted_log_ratios(manifold, &eta, &eta_prime, &ys);
            let d_prime = sorted_log_ratios(manifold, &eta, &eta_prime, &ys_prime);
            Ok(replicate_profile(&eps, cfg.sigma, &d, &d_prime))
        })
        .collect::<Result<_>>()?;

    let m = cfg.m as f64;
    let mut l = vec![0.0; eps.len()];
    for row in &per_replicate {
        l.iter_mut().zip(row).for_each(|(acc, v)| *acc += v);
    }
    l.iter_mut().for_each(|v| *v /= m);
    let se = (0..eps.len())
        .map(|k| {
            if cfg.m < 2 {
                return f64::NAN;
            }
            let ss: f64 = per_replicate.iter().map(|r| (r[k] - l[k]).powi(2)).sum();
            (ss / (m - 1.0)).sqrt() / m.sqrt()
        })
        .collect();

    let curve = EpsCurve {
        eps,
        l,
        se: Some(se),
    };
    let mu = curve.mu()?;
    let replicate_mu = per_replicate
        .par_iter()
        .map(|row| mu_from_profile(&curve.eps, row))
        .collect::<Result<Vec<_>>>()?;
    let spread = Spread::of(&replicate_mu).expect("m ≥ 1");
    Ok(McmcCalibration {
        budget: PrivacyBudget::monte_carlo(mu, spread)?,
        curve,
        replicate_mu,
        footprints: (eta, eta_prime),
    })
}

/// `d(η′, y)² − d(η, y)²` for every draw, ascending.
fn sorted_log_ratios(manifold: &ManifoldSpec, eta: &Point, eta_prime: &Point, ys: &[Point]) -> Vec<f64> {
    let mut d: Vec<f64> = ys
        .iter()
        .map(|y| {
            let to_far = manifold.dist_raw(eta_prime.coords(), y.coords());
            let to_near = manifold.dist_raw(eta.coords(), y.coords());
            to_far * to_far - to_near * to_near
        })
        .collect();
    d.sort_by(f64::total_cmp);
    d
}

/// One replicate's `l_ε = #{d ≥ 2σ²ε}/n − e^ε #{d′ ≥ 2σ²ε}/n`; ties count
/// as inside the set.
fn replicate_profile(eps: &[f64], sigma: f64, d: &[f64], d_prime: &[f64]) -> Vec<f64> {
    let n = d.len() as f64;
    let n_prime = d_prime.len() as f64;
    let above = |sorted: &[f64], t: f64| (sorted.len() - sorted.partition_point(|&x| x < t)) as f64;
    eps.iter()
        .map(|&e| {
            let t = 2.0 * sigma * sigma * e;
            above(d, t) / n - e.exp() * above(d_prime, t) / n_prime
        })
        .collect()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_closed_form() {
        assert_eq!(calibrate_euclidean(1.0, 4.0).unwrap().mu(), 0.25);
        assert_eq!(calibrate_euclidean(1.0, 1.0).unwrap().mu(), 1.0);
        assert_eq!(calibrate_euclidean(2.0, 4.0).unwrap().mu(), 0.5);
        assert!(calibrate_euclidean(0.0, 1.0).is_err());
    }

    #[test]
    fn grid_ends_at_eps_max() {
        let g = eps_grid(PI / 2.0, 1000);
        assert_eq!(g.len(), 1000);
        assert_eq!(*g.last().unwrap(), PI / 2.0);
        assert!(g[0] > 0.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn circle_mass_at_unit_rate() {
        // Φ(π) − Φ(−π) from 40-digit arithmetic
        assert!((s1_mass(1.0) - 0.99831968366347325).abs() < 1e-15);
    }

    #[test]
    fn h_s1_vanishes_at_eps_max() {
        for sigma in [0.5, 1.0, 2.0] {
            let eps_max = PI / (2.0 * sigma * sigma);
            assert!(h_s1(sigma, eps_max, 1.0).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn h_s1_domain() {
        assert!(h_s1(1.0, -0.1, 1.0).is_err());
        assert!(h_s1(1.0, PI / 2.0 + 0.01, 1.0).is_err());
        assert!(h_s1(1.0, 0.1, 4.0).is_err());
        assert!(h_s1(1.0, 0.1, PI).is_ok());
    }

    #[test]
    fn s1_budget_locality_and_compactness() {
        let small = calibrate_s1(1.0, 0.25, 1000).unwrap().mu();
        assert!((small - 4.0).abs() / 4.0 < 1e-3, "{small}");
        let large = calibrate_s1(1.0, 4.0, 1000).unwrap().mu();
        assert!(large < 0.25, "{large}");
    }

    #[test]
    fn profile_to_mu_skips_nonpositive() {
        assert_eq!(mu_from_profile(&[0.1, 0.2], &[-0.3, 0.0]).unwrap(), 0.0);
        let target = gdp::delta_mu(0.7, 0.2).unwrap();
        let mu = mu_from_profile(&[0.1, 0.2], &[-0.3, target]).unwrap();
        assert!((mu - 0.7).abs() < 1e-8);
        assert!(mu_from_profile(&[0.1], &[1.0]).is_err());
    }

    #[test]
    fn replicate_profile_counts_ties_inside() {
        // threshold 2σ²ε = 1 with σ = 1, ε = 0.5
        let l = replicate_profile(&[0.5], 1.0, &[0.0, 1.0, 2.0], &[0.0, 0.0, 1.0]);
        let want = 2.0 / 3.0 - 0.5f64.exp() / 3.0;
        assert!((l[0] - want).abs() < 1e-15);
    }

    #[test]
    fn mcmc_rejects_oversized_sensitivity() {
        let cfg = CalibrationConfig {
            m: 2,
            n: 10,
            n_eps: 10,
            ..CalibrationConfig::new(PI, 1.0, 0)
        };
        assert!(calibrate_mcmc(&ManifoldSpec::sphere(2), &cfg).is_err());
        let bad = CalibrationConfig { m: 0, ..cfg };
        assert!(calibrate_mcmc(&ManifoldSpec::euclidean(1), &bad).is_err());
    }

    #[test]
    fn mcmc_is_deterministic() {
        let cfg = CalibrationConfig {
            m: 4,
            n: 200,
            n_eps: 50,
            ..CalibrationConfig::new(0.5, 1.0, 42)
        };
        let s = ManifoldSpec::sphere(2);
        let a = calibrate_mcmc(&s, &cfg).unwrap();
        let b = calibrate_mcmc(&s, &cfg).unwrap();
        assert_eq!(a, b);
        let spread = a.budget.spread().unwrap();
        assert!(spread.min <= spread.mean && spread.mean <= spread.max);
        let d = s.distance(&a.footprints.0, &a.footprints.1).unwrap();
        assert!((d - 0.5).abs() < 1e-10);
    }
}
