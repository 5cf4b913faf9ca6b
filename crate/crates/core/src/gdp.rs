//! Scalar Gaussian differential privacy machinery.
//!
//! A mechanism is μ-GDP exactly when it is (ε, δ_μ(ε))-DP for every ε ≥ 0,
//! with
//!
//! ```text
//! δ_μ(ε) = Φ(−ε/μ + μ/2) − e^ε Φ(−ε/μ − μ/2).
//! ```

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_quantile};

/// Lower end of the initial bisection bracket for μ.
pub const MU_BRACKET_LO: f64 = 1e-8;
/// Initial upper end; doubled until it brackets the target.
pub const MU_BRACKET_HI: f64 = 100.0;
/// Absolute tolerance of [`solve_mu`].
pub const MU_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BudgetMethod {
    ClosedForm,
    AnalyticS1,
    MonteCarlo,
}

impl BudgetMethod {
    pub fn name(self) -> &'static str {
        match self {
            BudgetMethod::ClosedForm => "closed-form",
            BudgetMethod::AnalyticS1 => "analytic",
            BudgetMethod::MonteCarlo => "mcmc",
        }
    }
}

impl fmt::Display for BudgetMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Min / max / mean of replicate-level budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spread {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Spread {
    /// `None` for an empty slice.
    pub fn of(values: &[f64]) -> Option<Spread> {
        if values.is_empty() {
            return None;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Some(Spread {
            min,
            max,
            mean: mean.clamp(min, max),
        })
    }
}

/// A GDP privacy budget μ together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    mu: f64,
    method: BudgetMethod,
    spread: Option<Spread>,
}

impl PrivacyBudget {
    pub fn closed_form(mu: f64) -> Result<Self> {
        Self::checked(mu, BudgetMethod::ClosedForm, None)
    }

    pub fn analytic_s1(mu: f64) -> Result<Self> {
        Self::checked(mu, BudgetMethod::AnalyticS1, None)
    }

    pub fn monte_carlo(mu: f64, spread: Spread) -> Result<Self> {
        if !(spread.min <= spread.mean && spread.mean <= spread.max) {
            return Err(Error::param("spread", format!("{spread:?} is not ordered")));
        }
        Self::checked(mu, BudgetMethod::MonteCarlo, Some(spread))
    }

    fn checked(mu: f64, method: BudgetMethod, spread: Option<Spread>) -> Result<Self> {
        if !(mu >= 0.0) || mu.is_infinite() {
            return Err(Error::param("mu", format!("{mu} must be finite and nonnegative")));
        }
        Ok(PrivacyBudget { mu, method, spread })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn method(&self) -> BudgetMethod {
        self.method
    }

    pub fn spread(&self) -> Option<Spread> {
        self.spread
    }
}

/// An (ε, δ) differential-privacy guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpPoint {
    eps: f64,
    delta: f64,
}

impl DpPoint {
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(Error::param("eps", format!("{eps} must be nonnegative")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::param("delta", format!("{delta} must lie in [0, 1)")));
        }
        Ok(DpPoint { eps, delta })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// δ_μ(ε), the privacy profile of μ-GDP.
pub fn delta_mu(mu: f64, eps: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::param("mu", format!("{mu} must be positive")));
    }
    if !(eps >= 0.0) {
        return Err(Error::param("eps", format!("{eps} must be nonnegative")));
    }
    Ok(delta_mu_unchecked(mu, eps))
}

pub(crate) fn delta_mu_unchecked(mu: f64, eps: f64) -> f64 {
    let a = normal_cdf(-eps / mu + mu / 2.0);
    let b = normal_cdf(-eps / mu - mu / 2.0);
    let d = if b == 0.0 { a } else { a - eps.exp() * b };
    // cancellation in the far tail can leave a few ulps below zero
    d.max(0.0)
}

/// Smallest μ with δ_μ(ε) ≥ `delta_target`, to absolute tolerance
/// [`MU_TOL`]. Targets ≤ 0 impose no constraint and give 0.
pub fn solve_mu(eps: f64, delta_target: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::param("eps", format!("{eps} must be nonnegative")));
    }
    if !(delta_target < 1.0) {
        return Err(Error::param(
            "delta_target",
            format!("{delta_target} must be below 1"),
        ));
    }
    if delta_target <= 0.0 {
        return Ok(0.0);
    }
    let mut lo = MU_BRACKET_LO;
    if delta_mu_unchecked(lo, eps) >= delta_target {
        return Ok(lo);
    }
    let mut hi = MU_BRACKET_HI;
    while delta_mu_unchecked(hi, eps) < delta_target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Numerical(format!(
                "no μ reaches δ = {delta_target} at ε = {eps}"
            )));
        }
    }
    while hi - lo > MU_TOL / 4.0 {
        let mid = 0.5 * (lo + hi);
        if delta_mu_unchecked(mid, eps) >= delta_target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// μ achieved by any ε-DP mechanism: −2 Φ⁻¹(1 / (1 + e^ε)).
pub fn epsdp_to_gdp(eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::param("eps", format!("{eps} must be nonnegative")));
    }
    let p = 1.0 / (1.0 + eps.exp());
    Ok((-2.0 * normal_quantile(p)).max(0.0))
}

/// ε of the ε-DP guarantee matched to μ-GDP: log[(1 − Φ(−μ/2)) / Φ(−μ/2)].
pub fn gdp_to_epsdp(mu: f64) -> Result<f64> {
    if !(mu >= 0.0) || mu.is_infinite() {
        return Err(Error::param("mu", format!("{mu} must be nonnegative and finite")));
    }
    let lower = normal_cdf(-mu / 2.0);
    let upper = normal_cdf(mu / 2.0);
    Ok((upper / lower).ln())
}

/// Grid on which monotonicity of δ_μ(ε) is checked: μ ∈ {0.1, 0.2, …, 10},
/// ε ∈ {0, 0.1, …, 10}.
pub fn monotonicity_grid() -> (Vec<f64>, Vec<f64>) {
    let mus = (1..=100).map(|k| k as f64 / 10.0).collect();
    let epss = (0..=100).map(|k| k as f64 / 10.0).collect();
    (mus, epss)
}

/// Checks that δ_μ(ε) lies in [0, 1), is non-increasing in ε and
/// non-decreasing in μ across [`monotonicity_grid`].
pub fn check_profile_monotonicity() -> Result<()> {
    const SLACK: f64 = 1e-15;
    let (mus, epss) = monotonicity_grid();
    let table: Vec<Vec<f64>> = mus
        .iter()
        .map(|&m| epss.iter().map(|&e| delta_mu_unchecked(m, e)).collect())
        .collect();
    for (i, row) in table.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if !(0.0..1.0).contains(&d) {
                return Err(Error::Numerical(format!(
                    "δ_μ(ε) = {d} outside [0, 1) at μ = {}, ε = {}",
                    mus[i], epss[j]
                )));
            }
            if j > 0 && d > row[j - 1] + SLACK {
                return Err(Error::Numerical(format!(
                    "δ_μ(ε) increases in ε at μ = {}, ε = {}",
                    mus[i], epss[j]
                )));
            }
            if i > 0 && d + SLACK < table[i - 1][j] {
                return Err(Error::Numerical(format!(
                    "δ_μ(ε) decreases in μ at μ = {}, ε = {}",
                    mus[i], epss[j]
                )));
            }
        }
    }
    Ok(())
}

/// Runs [`check_profile_monotonicity`] once per process.
pub(crate) fn ensure_profile_monotone() -> Result<()> {
    static CHECKED: OnceLock<Result<()>> = OnceLock::new();
    CHECKED.get_or_init(check_profile_monotonicity).clone()
}
