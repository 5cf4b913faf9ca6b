//! Private release of Fréchet means.

use rand::Rng;

use crate::calibration::{calibrate_euclidean, calibrate_mcmc, calibrate_s1, CalibrationConfig};
use crate::error::{Error, Result};
use crate::gdp::{epsdp_to_gdp, PrivacyBudget};
use crate::manifold::{ManifoldKind, ManifoldSpec, Point};
use crate::samplers::{mh_sample, sample_gaussian, ChainConfig, RiemannianGaussian, RiemannianLaplace, SamplerChoice};

pub const DEFAULT_STEP: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 1000;

/// Largest admissible data radius r* for curvature upper bound `kappa` and
/// injectivity radius `inj`: min{inj, π/(2√κ)}/2 for κ > 0, inj/2 otherwise.
pub fn max_data_radius(kappa: f64, inj: f64) -> f64 {
    if kappa > 0.0 {
        inj.min(std::f64::consts::PI / (2.0 * kappa.sqrt())) / 2.0
    } else {
        inj / 2.0
    }
}

/// A dataset contained in the ball `B_r(center)` with `r < r*`, which makes
/// its Fréchet mean exist, be unique and have bounded sensitivity.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    manifold: ManifoldSpec,
    points: Vec<Point>,
    center: Point,
    radius: f64,
}

impl DatasetSpec {
    pub fn new(manifold: ManifoldSpec, points: Vec<Point>, center: Point, radius: f64) -> Result<Self> {
        manifold.validate(&center)?;
        let r_star = max_data_radius(manifold.curvature(), manifold.injectivity_radius());
        if !(radius > 0.0 && radius < r_star) {
            return Err(Error::param(
                "r",
                format!("{radius} must lie in (0, {r_star})"),
            ));
        }
        for (i, p) in points.iter().enumerate() {
            manifold.validate(p)?;
            let d = manifold.distance(&center, p)?;
            // sampled balls land on the boundary up to rounding
            if d > radius * (1.0 + 1e-12) {
                return Err(Error::param(
                    "points",
                    format!("point {i} is at distance {d} > r = {radius} from the center"),
                ));
            }
        }
        Ok(DatasetSpec {
            manifold,
            points,
            center,
            radius,
        })
    }

    pub fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// A neighbouring dataset: one uniformly chosen point replaced by a fresh
    /// draw from the same ball.
    pub fn neighbor<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DatasetSpec> {
        if self.points.is_empty() {
            return Err(Error::param("points", "an empty dataset has no neighbours"));
        }
        let mut points = self.points.clone();
        let i = rng.random_range(0..points.len());
        points[i] = self
            .manifold
            .sample_ball(&self.center, self.radius, 1, rng)?
            .pop()
            .expect("one draw requested");
        Ok(DatasetSpec { points, ..self.clone() })
    }

    /// Sensitivity of the Fréchet mean of a dataset of this size and radius.
    pub fn sensitivity(&self) -> Result<f64> {
        frechet_sensitivity(self.radius, self.manifold.curvature(), self.points.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrechetOptions {
    pub step: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FrechetOptions {
    fn default() -> Self {
        FrechetOptions {
            step: DEFAULT_STEP,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Fréchet mean by Riemannian gradient descent,
/// `x ← exp_x(step · mean_i log_x(x_i))`, until the mean log has norm below
/// `tol`.
pub fn frechet_mean(data: &DatasetSpec, opts: &FrechetOptions) -> Result<Point> {
    frechet_mean_of(&data.manifold, &data.points, opts)
}

/// [`frechet_mean`] without the ball bookkeeping; starts at the first point.
pub fn frechet_mean_of(manifold: &ManifoldSpec, points: &[Point], opts: &FrechetOptions) -> Result<Point> {
    let first = points
        .first()
        .ok_or_else(|| Error::param("points", "the Fréchet mean of no points is undefined"))?;
    if !(opts.step > 0.0) || !(opts.tol > 0.0) {
        return Err(Error::param("step", "step and tol must be positive"));
    }
    let inv_n = 1.0 / points.len() as f64;
    let mut x = first.coords().to_vec();
    let mut grad_norm = f64::INFINITY;
    for _ in 0..=opts.max_iter {
        let mut grad = vec![0.0; x.len()];
        for p in points {
            let v = manifold.log_raw(&x, p.coords())?;
            grad.iter_mut().zip(&v).for_each(|(g, vi)| *g += vi * inv_n);
        }
        grad_norm = manifold.tangent_norm(&crate::manifold::TangentVector::new(Point::new(x.clone()), grad.clone()));
        if grad_norm < opts.tol {
            return Ok(Point::new(x));
        }
        grad.iter_mut().for_each(|g| *g *= opts.step);
        x = manifold.exp_raw(&x, &grad);
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        grad_norm,
    })
}

/// Upper bound on `d(x̄, x̄′)` for neighbouring datasets of size `n` in a
/// ball of radius `r`: `2r(2 − h)/(n h)` with `h = 2r√κ cot(2r√κ)` for κ > 0
/// and `h = 1` otherwise.
pub fn frechet_sensitivity(r: f64, kappa: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let inj = if kappa > 0.0 {
        std::f64::consts::PI / kappa.sqrt()
    } else {
        f64::INFINITY
    };
    let r_star = max_data_radius(kappa, inj);
    if !(r > 0.0 && r < r_star) {
        return Err(Error::param("r", format!("{r} must lie in (0, {r_star})")));
    }
    let h = if kappa > 0.0 {
        let a = 2.0 * r * kappa.sqrt();
        a / a.tan()
    } else {
        1.0
    };
    Ok(2.0 * r * (2.0 - h) / (n as f64 * h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MechanismKind {
    Gaussian,
    Laplace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismOutput {
    pub released: Point,
    pub mechanism: MechanismKind,
    /// σ for the Gaussian mechanism, b for the Laplace mechanism.
    pub noise_param: f64,
    pub budget: PrivacyBudget,
}

/// Riemannian Gaussian mechanism with a fixed, already-calibrated budget.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMechanism {
    manifold: ManifoldSpec,
    sigma: f64,
    budget: PrivacyBudget,
    chain: ChainConfig,
}

impl GaussianMechanism {
    /// Calibrates the budget by the route suited to the manifold: closed
    /// form on ℝᵈ, analytic on S¹, Monte Carlo otherwise. `calib` supplies Δ,
    /// σ and the Monte-Carlo settings.
    pub fn calibrated(manifold: ManifoldSpec, calib: &CalibrationConfig) -> Result<Self> {
        let budget = match manifold.kind() {
            ManifoldKind::Euclidean => calibrate_euclidean(calib.delta_sens, calib.sigma)?,
            ManifoldKind::Circle => calibrate_s1(calib.delta_sens, calib.sigma, calib.n_eps)?,
            _ => calibrate_mcmc(&manifold, calib)?.budget,
        };
        Self::with_budget(manifold, calib.sigma, budget)
    }

    pub fn with_budget(manifold: ManifoldSpec, sigma: f64, budget: PrivacyBudget) -> Result<Self> {
        if !(sigma > 0.0) || sigma.is_infinite() {
            return Err(Error::param("sigma", format!("{sigma} must be positive and finite")));
        }
        Ok(GaussianMechanism {
            manifold,
            sigma,
            budget,
            chain: ChainConfig::default(),
        })
    }

    pub fn with_chain(mut self, chain: ChainConfig) -> Self {
        self.chain = chain;
        self
    }

    pub fn budget(&self) -> PrivacyBudget {
        self.budget
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// One draw from `N_M(xbar, σ²)`.
    pub fn release<R: Rng + ?Sized>(&self, xbar: &Point, rng: &mut R) -> Result<MechanismOutput> {
        let dist = RiemannianGaussian::new(self.manifold, xbar.clone(), self.sigma)?;
        let released = sample_gaussian(&dist, 1, SamplerChoice::Auto, &self.chain, rng)?
            .pop()
            .expect("one draw requested");
        Ok(MechanismOutput {
            released,
            mechanism: MechanismKind::Gaussian,
            noise_param: self.sigma,
            budget: self.budget,
        })
    }
}

/// Calibrates and releases in one call.
pub fn gaussian_mechanism<R: Rng + ?Sized>(
    xbar: &Point,
    manifold: ManifoldSpec,
    calib: &CalibrationConfig,
    rng: &mut R,
) -> Result<MechanismOutput> {
    GaussianMechanism::calibrated(manifold, calib)?.release(xbar, rng)
}

/// Riemannian Laplace mechanism with rate b = Δ/ε; ε-DP, hence μ-GDP with
/// μ = −2Φ⁻¹(1/(1 + e^ε)).
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceMechanism {
    manifold: ManifoldSpec,
    rate: f64,
    budget: PrivacyBudget,
    chain: ChainConfig,
}

impl LaplaceMechanism {
    pub fn new(manifold: ManifoldSpec, delta_sens: f64, eps: f64) -> Result<Self> {
        if !(delta_sens > 0.0) || delta_sens.is_infinite() {
            return Err(Error::param("delta", format!("{delta_sens} must be positive")));
        }
        if !(eps > 0.0) || eps.is_infinite() {
            return Err(Error::param("eps", format!("{eps} must be positive")));
        }
        Ok(LaplaceMechanism {
            manifold,
            rate: delta_sens / eps,
            budget: PrivacyBudget::closed_form(epsdp_to_gdp(eps)?)?,
            chain: ChainConfig::default(),
        })
    }

    pub fn with_chain(mut self, chain: ChainConfig) -> Self {
        self.chain = chain;
        self
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn budget(&self) -> PrivacyBudget {
        self.budget
    }

    pub fn release<R: Rng + ?Sized>(&self, xbar: &Point, rng: &mut R) -> Result<MechanismOutput> {
        let dist = RiemannianLaplace::new(self.manifold, xbar.clone(), self.rate)?;
        let released = mh_sample(&dist, 1, &self.chain, rng)?
            .samples
            .pop()
            .expect("one draw requested");
        Ok(MechanismOutput {
            released,
            mechanism: MechanismKind::Laplace,
            noise_param: self.rate,
            budget: self.budget,
        })
    }
}

pub fn laplace_mechanism<R: Rng + ?Sized>(
    xbar: &Point,
    delta_sens: f64,
    eps: f64,
    manifold: ManifoldSpec,
    rng: &mut R,
) -> Result<MechanismOutput> {
    LaplaceMechanism::new(manifold, delta_sens, eps)?.release(xbar, rng)
}
