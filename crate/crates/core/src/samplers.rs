//! Sampling from Riemannian Gaussian and Riemannian Laplace laws.
//!
//! Both laws are known only up to their normalizing constant, so the generic
//! route is Metropolis–Hastings with an exponential-wrapped Gaussian proposal:
//! draw an isotropic normal tangent vector `v` at the current state `x`, reject
//! outright when `‖v‖` reaches the injectivity radius, otherwise propose
//! `y = exp_x(v)`.
//!
//! On a constant-curvature space the density of that proposal at `y` is a
//! function of `d(x, y) = ‖v‖` alone: the tangent normal density depends on
//! the norm only, the Jacobian of `exp_x` at `v` is `(s(‖v‖)/‖v‖)^{d−1}`, and
//! the mass lost to truncation is the same at every base point. Hence
//! `q(y | x) = q(x | y)` and the Hastings ratio reduces to `p(y) / p(x)`.
//!
//! The circle and Euclidean space also have exact samplers.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::manifold::{wrap_angle, ManifoldKind, ManifoldSpec, Point};
use crate::special::{normal_cdf, normal_quantile};

pub const DEFAULT_BURN_IN: usize = 1000;
pub const DEFAULT_THIN: usize = 5;
/// Burn-in steps between proposal-scale adjustments.
pub const ADAPT_WINDOW: usize = 100;
/// Maximum number of halvings/doublings of the proposal scale.
pub const MAX_ADAPTATIONS: usize = 5;
pub const TARGET_ACCEPTANCE: (f64, f64) = (0.2, 0.6);

/// A law on a manifold with density `exp(log_density_at(d(y, η)))` up to a
/// constant, where η is the footprint.
pub trait RadialTarget {
    fn manifold(&self) -> &ManifoldSpec;
    fn footprint(&self) -> &Point;
    /// σ for the Gaussian, b for the Laplace law.
    fn rate(&self) -> f64;
    /// Unnormalized log-density as a function of the distance to the footprint.
    fn log_density_at(&self, distance: f64) -> f64;

    fn log_unnormalized_density(&self, y: &Point) -> Result<f64> {
        let d = self.manifold().distance(self.footprint(), y)?;
        Ok(self.log_density_at(d))
    }
}

/// `N_M(η, σ²)`: density ∝ exp(−d(y, η)² / 2σ²).
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannianGaussian {
    manifold: ManifoldSpec,
    footprint: Point,
    rate: f64,
}

/// Riemannian Laplace law: density ∝ exp(−d(y, η) / b).
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannianLaplace {
    manifold: ManifoldSpec,
    footprint: Point,
    rate: f64,
}

fn check_target(manifold: &ManifoldSpec, footprint: &Point, rate: f64) -> Result<()> {
    manifold.validate(footprint)?;
    if !(rate > 0.0) || rate.is_infinite() {
        return Err(Error::param("rate", format!("{rate} must be positive and finite")));
    }
    Ok(())
}

impl RiemannianGaussian {
    pub fn new(manifold: ManifoldSpec, footprint: Point, sigma: f64) -> Result<Self> {
        check_target(&manifold, &footprint, sigma)?;
        Ok(RiemannianGaussian {
            manifold,
            footprint,
            rate: sigma,
        })
    }
}

impl RiemannianLaplace {
    pub fn new(manifold: ManifoldSpec, footprint: Point, b: f64) -> Result<Self> {
        check_target(&manifold, &footprint, b)?;
        Ok(RiemannianLaplace {
            manifold,
            footprint,
            rate: b,
        })
    }
}

impl RadialTarget for RiemannianGaussian {
    fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }
    fn footprint(&self) -> &Point {
        &self.footprint
    }
    fn rate(&self) -> f64 {
        self.rate
    }
    fn log_density_at(&self, distance: f64) -> f64 {
        -distance * distance / (2.0 * self.rate * self.rate)
    }
}

impl RadialTarget for RiemannianLaplace {
    fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }
    fn footprint(&self) -> &Point {
        &self.footprint
    }
    fn rate(&self) -> f64 {
        self.rate
    }
    fn log_density_at(&self, distance: f64) -> f64 {
        -distance / self.rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub burn_in: usize,
    /// Keep every `thin`-th state after burn-in.
    pub thin: usize,
    /// Initial proposal standard deviation; `None` starts at the target rate.
    pub proposal_scale: Option<f64>,
    /// Halve/double the scale during burn-in to bring the acceptance rate
    /// into [`TARGET_ACCEPTANCE`].
    pub adapt: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            burn_in: DEFAULT_BURN_IN,
            thin: DEFAULT_THIN,
            proposal_scale: None,
            adapt: true,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::param("thin", "must be at least 1"));
        }
        if let Some(s) = self.proposal_scale {
            if !(s > 0.0) || s.is_infinite() {
                return Err(Error::param("proposal_scale", format!("{s} must be positive")));
            }
        }
        Ok(())
    }
}

/// Output of a Metropolis–Hastings run.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub samples: Vec<Point>,
    /// Fraction of accepted proposals after burn-in.
    pub acceptance_rate: f64,
    /// Proposal scale in force after burn-in.
    pub proposal_scale: f64,
}

struct Walker<'a, T: RadialTarget> {
    target: &'a T,
    state: Vec<f64>,
    log_p: f64,
    scale: f64,
}

impl<T: RadialTarget> Walker<'_, T> {
    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let m = self.target.manifold();
        let v = m.random_tangent_raw(&self.state, self.scale, rng);
        // ‖v‖ beyond the injectivity radius counts as a rejection
        if m.is_compact() {
            let n = match m.kind() {
                ManifoldKind::Circle => v[0].abs(),
                _ => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            };
            if n >= m.injectivity_radius() {
                return false;
            }
        }
        let y = m.exp_raw(&self.state, &v);
        let log_py = self
            .target
            .log_density_at(m.dist_raw(self.target.footprint().coords(), &y));
        let log_ratio = log_py - self.log_p;
        if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
            self.state = y;
            self.log_p = log_py;
            true
        } else {
            false
        }
    }
}

/// Metropolis–Hastings chain started at the footprint.
pub fn mh_sample<T: RadialTarget, R: Rng + ?Sized>(
    target: &T,
    n: usize,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<Chain> {
    mh_sample_from(target, target.footprint(), n, cfg, rng)
}

/// Metropolis–Hastings chain started at `init`.
pub fn mh_sample_from<T: RadialTarget, R: Rng + ?Sized>(
    target: &T,
    init: &Point,
    n: usize,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<Chain> {
    cfg.validate()?;
    let m = target.manifold();
    m.validate(init)?;
    let mut walker = Walker {
        target,
        state: init.coords().to_vec(),
        log_p: target.log_density_at(m.dist_raw(target.footprint().coords(), init.coords())),
        scale: cfg.proposal_scale.unwrap_or(target.rate()),
    };

    let mut adaptations = 0;
    let mut adapting = cfg.adapt;
    let mut window_accepts = 0;
    let mut window_len = 0;
    for _ in 0..cfg.burn_in {
        let accepted = walker.step(rng);
        if !adapting {
            continue;
        }
        window_accepts += accepted as usize;
        window_len += 1;
        if window_len == ADAPT_WINDOW {
            let rate = window_accepts as f64 / window_len as f64;
            if rate < TARGET_ACCEPTANCE.0 {
                walker.scale /= 2.0;
                adaptations += 1;
            } else if rate > TARGET_ACCEPTANCE.1 {
                walker.scale *= 2.0;
                adaptations += 1;
            } else {
                adapting = false;
            }
            if adaptations == MAX_ADAPTATIONS {
                adapting = false;
            }
            window_accepts = 0;
            window_len = 0;
        }
    }

    let mut samples = Vec::with_capacity(n);
    let mut accepts = 0usize;
    let mut steps = 0usize;
    while samples.len() < n {
        for _ in 0..cfg.thin {
            accepts += walker.step(rng) as usize;
            steps += 1;
        }
        samples.push(Point::new(walker.state.clone()));
    }
    let acceptance_rate = if steps == 0 {
        0.0
    } else {
        accepts as f64 / steps as f64
    };
    Ok(Chain {
        samples,
        acceptance_rate,
        proposal_scale: walker.scale,
    })
}

/// Exact i.i.d. draws from the Riemannian Gaussian on S¹ with footprint
/// angle `eta`: a normal truncated to (−π, π] by inverse CDF, rotated by `eta`.
pub fn s1_exact_sample<R: Rng + ?Sized>(eta: f64, sigma: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || sigma.is_infinite() {
        return Err(Error::param("sigma", format!("{sigma} must be positive and finite")));
    }
    // |θ − η| is a normal truncated to [0, π]; sample its lower-tail mirror
    // image on [−π, 0] where the inverse CDF keeps full precision.
    let lo = normal_cdf(-PI / sigma);
    let width = 0.5 - lo;
    let out = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let t = (-sigma * normal_quantile(lo + u * width)).clamp(0.0, PI);
            let signed = if rng.random::<bool>() { t } else { -t };
            wrap_angle(eta + signed)
        })
        .collect();
    Ok(out)
}

/// Exact draws for the Gaussian targets that have one: S¹ and ℝᵈ.
pub fn exact_gaussian_sample<R: Rng + ?Sized>(
    dist: &RiemannianGaussian,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Point>> {
    match dist.manifold.kind() {
        ManifoldKind::Circle => Ok(s1_exact_sample(dist.footprint.coords()[0], dist.rate, n, rng)?
            .into_iter()
            .map(|t| Point::new(vec![t]))
            .collect()),
        ManifoldKind::Euclidean => Ok((0..n)
            .map(|_| {
                Point::new(
                    dist.footprint
                        .coords()
                        .iter()
                        .map(|c| c + dist.rate * rng.sample::<f64, _>(StandardNormal))
                        .collect(),
                )
            })
            .collect()),
        other => Err(Error::Unsupported(format!("no exact Gaussian sampler on the {other}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerChoice {
    /// Exact where available (Gaussian on S¹ and ℝᵈ), otherwise MH.
    Auto,
    Exact,
    Mh,
}

/// `n` draws from a Gaussian target with the chosen sampler.
pub fn sample_gaussian<R: Rng + ?Sized>(
    dist: &RiemannianGaussian,
    n: usize,
    choice: SamplerChoice,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<Vec<Point>> {
    let exact_available = matches!(dist.manifold.kind(), ManifoldKind::Circle | ManifoldKind::Euclidean);
    match choice {
        SamplerChoice::Exact => exact_gaussian_sample(dist, n, rng),
        SamplerChoice::Auto if exact_available => exact_gaussian_sample(dist, n, rng),
        _ => Ok(mh_sample(dist, n, cfg, rng)?.samples),
    }
}
