//! Gaussian differential privacy on constant-curvature Riemannian manifolds.
//!
//! The crate covers the whole release pipeline for manifold-valued
//! summaries:
//!
//! * [`manifold`]: distance, exponential and logarithm maps, random points
//!   and balls on Euclidean space, the circle, spheres and hyperbolic space;
//! * [`gdp`]: the GDP privacy profile δ_μ(ε), its inverse in μ and the
//!   ε-DP ↔ μ-GDP conversions;
//! * [`samplers`]: Metropolis–Hastings with an exponential-wrapped Gaussian
//!   proposal for Riemannian Gaussian and Laplace targets, plus an exact
//!   sampler on the circle;
//! * [`calibration`]: the budget μ for a rate σ, in closed form on ℝᵈ,
//!   analytically on S¹ and by Monte Carlo on any constant-curvature space;
//! * [`mechanisms`]: Fréchet means, their sensitivity and the Gaussian and
//!   Laplace release mechanisms;
//! * [`experiments`]: seeded, reproducible experiment tables written as CSV.

// NaN-rejecting guards are written `!(x > 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod experiments;
pub mod gdp;
pub mod manifold;
pub mod mechanisms;
pub mod samplers;
pub mod seed;
pub mod special;

pub use error::{Error, Result};
pub use gdp::{BudgetMethod, DpPoint, PrivacyBudget, Spread};
pub use manifold::{ManifoldKind, ManifoldSpec, Point, TangentVector};
