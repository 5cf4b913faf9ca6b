//! Experiment drivers behind the `rgdp` subcommands.
//!
//! Each driver returns a [`Table`]; [`render`] turns it into CSV preceded by
//! the `#`-prefixed [`RunManifest`]. Rows are computed in parallel but
//! assembled in a fixed order, and every random stream is derived from the
//! master seed, a tag and the row key (σ's bit pattern, then the replicate
//! index), so a single row can be rerun on its own.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::calibration::{calibrate_euclidean, calibrate_mcmc, calibrate_s1, CalibrationConfig};
use crate::error::{Error, Result};
use crate::gdp::{gdp_to_epsdp, PrivacyBudget};
use crate::manifold::{ManifoldKind, ManifoldSpec, Point};
use crate::mechanisms::{
    frechet_mean, frechet_sensitivity, DatasetSpec, FrechetOptions, GaussianMechanism, LaplaceMechanism,
};
use crate::samplers::{exact_gaussian_sample, mh_sample, ChainConfig, RiemannianGaussian, RiemannianLaplace};
use crate::seed::{self, derive_seed};

pub const FIG1_REPLICATES: usize = 20;
pub const UTILITY_REPS: usize = 1000;
pub const UTILITY_N: usize = 10;
pub const UTILITY_RADIUS: f64 = PI / 8.0;

/// `k/4` for `k = 1..=k_max`.
pub fn quarter_grid(k_max: usize) -> Vec<f64> {
    (1..=k_max).map(|k| k as f64 / 4.0).collect()
}

/// Provenance written above every CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Vec<(String, String)>,
    pub seed: u64,
    pub timestamp: String,
    pub version: String,
    pub out: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            params: Vec::new(),
            seed,
            timestamp: "none".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            out: "-".to_string(),
        }
    }

    pub fn param(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn header(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: &str| s.push_str(&format!("# {k}: {v}\n"));
        line("subcommand", &self.subcommand);
        line("version", &self.version);
        line("seed", &self.seed.to_string());
        line("timestamp", &self.timestamp);
        line("out", &self.out);
        for (k, v) in &self.params {
            line(&format!("param.{k}"), v);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Trailing `# key: value` lines.
    pub footer: Vec<(String, String)>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }
}

pub fn render(manifest: &RunManifest, table: &Table) -> Result<Vec<u8>> {
    let mut out = manifest.header().into_bytes();
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Output(e.to_string());
    w.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        w.write_record(row).map_err(io)?;
    }
    out.extend(w.into_inner().map_err(|e| Error::Output(e.to_string()))?);
    for (k, v) in &table.footer {
        out.extend(format!("# {k}: {v}\n").bytes());
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Auto,
    Analytic,
    Mcmc,
    ClosedForm,
}

impl FromStr for MethodChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "analytic" => Ok(MethodChoice::Analytic),
            "mcmc" => Ok(MethodChoice::Mcmc),
            "closed-form" => Ok(MethodChoice::ClosedForm),
            _ => Err(Error::param("method", format!("unknown method {s:?}"))),
        }
    }
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodChoice::Auto => "auto",
            MethodChoice::Analytic => "analytic",
            MethodChoice::Mcmc => "mcmc",
            MethodChoice::ClosedForm => "closed-form",
        })
    }
}

/// Budget of one (manifold, Δ, σ) by the chosen route.
pub fn budget_for(manifold: &ManifoldSpec, method: MethodChoice, calib: &CalibrationConfig) -> Result<PrivacyBudget> {
    let method = match method {
        MethodChoice::Auto => match manifold.kind() {
            ManifoldKind::Euclidean => MethodChoice::ClosedForm,
            ManifoldKind::Circle => MethodChoice::Analytic,
            _ => MethodChoice::Mcmc,
        },
        m => m,
    };
    match method {
        MethodChoice::ClosedForm if manifold.kind() == ManifoldKind::Euclidean => {
            calibrate_euclidean(calib.delta_sens, calib.sigma)
        }
        MethodChoice::ClosedForm => Err(Error::param("method", "closed-form requires the euclidean manifold")),
        MethodChoice::Analytic if manifold.kind() == ManifoldKind::Circle => {
            calibrate_s1(calib.delta_sens, calib.sigma, calib.n_eps)
        }
        MethodChoice::Analytic => Err(Error::param("method", "analytic requires the circle")),
        _ => Ok(calibrate_mcmc(manifold, calib)?.budget),
    }
}

pub const CALIBRATE_COLUMNS: [&str; 9] = ["manifold", "dim", "delta", "sigma", "method", "mu", "mu_min", "mu_max", "seed"];

pub fn calibrate(manifold: &ManifoldSpec, method: MethodChoice, calib: &CalibrationConfig) -> Result<Table> {
    let budget = budget_for(manifold, method, calib)?;
    let spread = budget.spread();
    let mut t = Table::new(&CALIBRATE_COLUMNS);
    t.rows.push(vec![
        manifold.kind().name().to_string(),
        manifold.dim().to_string(),
        calib.delta_sens.to_string(),
        calib.sigma.to_string(),
        budget.method().name().to_string(),
        budget.mu().to_string(),
        opt(spread.map(|s| s.min)),
        opt(spread.map(|s| s.max)),
        calib.seed.to_string(),
    ]);
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig1Target {
    Circle,
    Euclidean,
}

impl Fig1Target {
    pub fn manifold(self) -> ManifoldSpec {
        match self {
            Fig1Target::Circle => ManifoldSpec::circle(),
            Fig1Target::Euclidean => ManifoldSpec::euclidean(1),
        }
    }
}

impl FromStr for Fig1Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Fig1Target::Circle),
            "euclidean" => Ok(Fig1Target::Euclidean),
            _ => Err(Error::param("target", format!("{s:?} is not circle or euclidean"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Config {
    pub target: Fig1Target,
    pub sigmas: Vec<f64>,
    pub replicates: usize,
    /// Δ, n, n_eps, m, ε_max and chain settings; σ and seed are set per run.
    pub calibration: CalibrationConfig,
}

impl Fig1Config {
    pub fn new(target: Fig1Target, seed: u64) -> Self {
        Fig1Config {
            target,
            sigmas: quarter_grid(16),
            replicates: FIG1_REPLICATES,
            calibration: CalibrationConfig::new(1.0, 1.0, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Row {
    pub sigma: f64,
    pub mu_exact: f64,
    /// Algorithm-2 estimate of each replicate.
    pub mu_mc: Vec<f64>,
}

pub const FIG1_COLUMNS: [&str; 5] = ["sigma", "mu_exact", "mu_mc_mean", "mu_mc_min", "mu_mc_max"];

/// One σ of the budget-versus-rate comparison.
pub fn fig1_row(cfg: &Fig1Config, sigma: f64) -> Result<Fig1Row> {
    let manifold = cfg.target.manifold();
    let base = CalibrationConfig {
        sigma,
        ..cfg.calibration
    };
    let mu_exact = match cfg.target {
        Fig1Target::Circle => calibrate_s1(base.delta_sens, sigma, base.n_eps)?.mu(),
        Fig1Target::Euclidean => calibrate_euclidean(base.delta_sens, sigma)?.mu(),
    };
    let row_seed = derive_seed(base.seed, "fig1_budget/sigma", sigma.to_bits());
    let mu_mc = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let c = CalibrationConfig {
                seed: derive_seed(row_seed, "fig1_budget/replicate", r),
                ..base
            };
            Ok(calibrate_mcmc(&manifold, &c)?.budget.mu())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Fig1Row { sigma, mu_exact, mu_mc })
}

pub fn fig1_budget(cfg: &Fig1Config) -> Result<Table> {
    if cfg.replicates == 0 {
        return Err(Error::param("replicates", "must be at least 1"));
    }
    let rows = cfg
        .sigmas
        .iter()
        .map(|&s| fig1_row(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&FIG1_COLUMNS);
    for r in rows {
        let s = crate::gdp::Spread::of(&r.mu_mc).expect("replicates ≥ 1");
        t.rows.push(vec![
            r.sigma.to_string(),
            r.mu_exact.to_string(),
            s.mean.to_string(),
            s.min.to_string(),
            s.max.to_string(),
        ]);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityConfig {
    pub dim: usize,
    pub sigmas: Vec<f64>,
    pub reps: usize,
    pub n_data: usize,
    pub radius: f64,
    /// n, n_eps, m, ε_max and chain settings of the budget calibration; Δ,
    /// σ and seed are set per row.
    pub calibration: CalibrationConfig,
    pub frechet: FrechetOptions,
    pub chain: ChainConfig,
    pub seed: u64,
}

impl UtilityConfig {
    pub fn new(seed: u64) -> Self {
        UtilityConfig {
            dim: 2,
            sigmas: quarter_grid(12),
            reps: UTILITY_REPS,
            n_data: UTILITY_N,
            radius: UTILITY_RADIUS,
            calibration: CalibrationConfig::new(1.0, 1.0, seed),
            frechet: FrechetOptions::default(),
            chain: ChainConfig::default(),
            seed,
        }
    }

    /// Sensitivity of the Fréchet mean under this configuration.
    pub fn delta_sens(&self) -> Result<f64> {
        frechet_sensitivity(self.radius, 1.0, self.n_data)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityRow {
    pub sigma: f64,
    pub mu: f64,
    pub eps: f64,
    pub dist_gauss: Vec<f64>,
    pub dist_laplace: Vec<f64>,
}

impl UtilityRow {
    pub fn gauss_mean_se(&self) -> (f64, f64) {
        mean_se(&self.dist_gauss)
    }

    pub fn laplace_mean_se(&self) -> (f64, f64) {
        mean_se(&self.dist_laplace)
    }
}

pub const UTILITY_COLUMNS: [&str; 7] = [
    "sigma",
    "mu",
    "eps",
    "dist_gauss_mean",
    "dist_gauss_se",
    "dist_laplace_mean",
    "dist_laplace_se",
];

/// Gaussian versus Laplace release of a Fréchet mean on Sᵈ at one σ: the
/// Gaussian budget μ is calibrated by Monte Carlo, the Laplace mechanism gets
/// the matching ε = gdp_to_epsdp(μ), and each repetition draws a fresh
/// dataset in a ball around a uniform center.
pub fn sphere_utility_row(cfg: &UtilityConfig, sigma: f64) -> Result<UtilityRow> {
    if cfg.reps == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    let sphere = ManifoldSpec::new(ManifoldKind::Sphere, cfg.dim)?;
    let delta = cfg.delta_sens()?;
    let row_seed = derive_seed(cfg.seed, "sphere_utility/sigma", sigma.to_bits());
    let calib = CalibrationConfig {
        delta_sens: delta,
        sigma,
        seed: derive_seed(row_seed, "sphere_utility/calibrate", 0),
        ..cfg.calibration
    };
    let budget = calibrate_mcmc(&sphere, &calib)?.budget;
    let eps = gdp_to_epsdp(budget.mu())?;
    let gauss = GaussianMechanism::with_budget(sphere, sigma, budget)?.with_chain(cfg.chain);
    let laplace = LaplaceMechanism::new(sphere, delta, eps)?.with_chain(cfg.chain);

    let dists = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = seed::stream(row_seed, "sphere_utility/rep", rep);
            let center = sphere.random_point(&mut rng);
            let points = sphere.sample_ball(&center, cfg.radius, cfg.n_data, &mut rng)?;
            let data = DatasetSpec::new(sphere, points, center, cfg.radius)?;
            let xbar = frechet_mean(&data, &cfg.frechet)?;
            let g = gauss.release(&xbar, &mut rng)?.released;
            let l = laplace.release(&xbar, &mut rng)?.released;
            Ok((sphere.distance(&xbar, &g)?, sphere.distance(&xbar, &l)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (dist_gauss, dist_laplace) = dists.into_iter().unzip();
    Ok(UtilityRow {
        sigma,
        mu: budget.mu(),
        eps,
        dist_gauss,
        dist_laplace,
    })
}

pub fn sphere_utility(cfg: &UtilityConfig) -> Result<Table> {
    let mut t = Table::new(&UTILITY_COLUMNS);
    for &sigma in &cfg.sigmas {
        let r = sphere_utility_row(cfg, sigma)?;
        let (gm, gse) = r.gauss_mean_se();
        let (lm, lse) = r.laplace_mean_se();
        t.rows.push(
            [r.sigma, r.mu, r.eps, gm, gse, lm, lse]
                .iter()
                .map(f64::to_string)
                .collect(),
        );
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistKind {
    Gaussian,
    Laplace,
}

impl FromStr for DistKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(DistKind::Gaussian),
            "laplace" => Ok(DistKind::Laplace),
            _ => Err(Error::param("dist", format!("{s:?} is not gaussian or laplace"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMethod {
    Mh,
    Exact,
}

impl FromStr for SampleMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mh" => Ok(SampleMethod::Mh),
            "exact" => Ok(SampleMethod::Exact),
            _ => Err(Error::param("sampler", format!("{s:?} is not mh or exact"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    pub manifold: ManifoldSpec,
    pub dist: DistKind,
    /// `None` uses the manifold's origin.
    pub footprint: Option<Point>,
    /// σ for the Gaussian, b for the Laplace.
    pub rate: f64,
    pub n: usize,
    pub sampler: SampleMethod,
    pub chain: ChainConfig,
    pub seed: u64,
}

/// Raw draws, one row of ambient coordinates each (`theta` on the circle).
pub fn sample(cfg: &SampleConfig) -> Result<Table> {
    let m = cfg.manifold;
    let footprint = cfg.footprint.clone().unwrap_or_else(|| m.origin());
    let mut rng = seed::stream(cfg.seed, "sample", 0);
    let (draws, acceptance) = match (cfg.sampler, cfg.dist) {
        (SampleMethod::Exact, _) if m.kind() != ManifoldKind::Circle => {
            return Err(Error::param("sampler", "exact sampling is only available on the circle"))
        }
        (SampleMethod::Exact, DistKind::Laplace) => {
            return Err(Error::param("sampler", "exact sampling is only available for the gaussian"))
        }
        (SampleMethod::Exact, DistKind::Gaussian) => {
            let g = RiemannianGaussian::new(m, footprint, cfg.rate)?;
            (exact_gaussian_sample(&g, cfg.n, &mut rng)?, None)
        }
        (SampleMethod::Mh, DistKind::Gaussian) => {
            let chain = mh_sample(&RiemannianGaussian::new(m, footprint, cfg.rate)?, cfg.n, &cfg.chain, &mut rng)?;
            (chain.samples, Some(chain.acceptance_rate))
        }
        (SampleMethod::Mh, DistKind::Laplace) => {
            let chain = mh_sample(&RiemannianLaplace::new(m, footprint, cfg.rate)?, cfg.n, &cfg.chain, &mut rng)?;
            (chain.samples, Some(chain.acceptance_rate))
        }
    };
    let columns: Vec<String> = if m.kind() == ManifoldKind::Circle {
        vec!["theta".to_string()]
    } else {
        (0..m.ambient_dim()).map(|i| format!("x{i}")).collect()
    };
    let mut t = Table {
        columns,
        ..Default::default()
    };
    t.rows = draws
        .iter()
        .map(|p| p.coords().iter().map(f64::to_string).collect())
        .collect();
    if let Some(a) = acceptance {
        t.footer.push(("acceptance_rate".to_string(), a.to_string()));
    }
    Ok(t)
}
