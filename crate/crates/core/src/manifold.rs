//! Constant-curvature model spaces: Euclidean space, the unit circle, the unit
//! sphere and hyperbolic space.
//!
//! Points are stored in ambient coordinates:
//!
//! | kind        | coordinates                                         |
//! |-------------|-----------------------------------------------------|
//! | euclidean   | `x ∈ ℝᵈ`                                            |
//! | circle      | a single angle in `(−π, π]`                         |
//! | sphere      | unit vector in `ℝᵈ⁺¹`                               |
//! | hyperbolic  | hyperboloid `⟨x, x⟩ = −1`, `x₀ ≥ 1` in `ℝᵈ⁺¹`         |
//!
//! Curvature is normalized to κ ∈ {−1, 0, +1}. A space of curvature ±c² is
//! the same space with every distance divided by c, so callers needing a
//! general curvature rescale distances (and sensitivities) themselves.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Points closer than this to the antipode of the base point are treated as
/// lying on the cut locus.
pub const CUT_LOCUS_TOL: f64 = 1e-12;

const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    Euclidean,
    Circle,
    Sphere,
    Hyperbolic,
}

impl ManifoldKind {
    pub fn name(self) -> &'static str {
        match self {
            ManifoldKind::Euclidean => "euclidean",
            ManifoldKind::Circle => "circle",
            ManifoldKind::Sphere => "sphere",
            ManifoldKind::Hyperbolic => "hyperbolic",
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(ManifoldKind::Euclidean),
            "circle" => Ok(ManifoldKind::Circle),
            "sphere" => Ok(ManifoldKind::Sphere),
            "hyperbolic" => Ok(ManifoldKind::Hyperbolic),
            other => Err(Error::param("manifold", format!("unknown kind `{other}`"))),
        }
    }
}

/// A constant-curvature space of intrinsic dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ManifoldSpec {
    kind: ManifoldKind,
    dim: usize,
}

/// A point in ambient coordinates. See the module docs for the layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    /// A point on the circle given by its angle, wrapped to `(−π, π]`.
    pub fn angle(theta: f64) -> Self {
        Point(vec![wrap_angle(theta)])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// A tangent vector `vec ∈ T_base M`, in the same ambient coordinates as its
/// base point (a single real number on the circle).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub vec: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: Point, vec: Vec<f64>) -> Self {
        TangentVector { base, vec }
    }

    pub fn zero(base: Point) -> Self {
        let vec = vec![0.0; base.len()];
        TangentVector { base, vec }
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minkowski product `−a₀b₀ + Σ aᵢbᵢ`.
fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + dot(&a[1..], &b[1..])
}

impl ManifoldSpec {
    pub fn new(kind: ManifoldKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "dimension must be positive"));
        }
        if kind == ManifoldKind::Circle && dim != 1 {
            return Err(Error::param("dim", "the circle has dimension 1"));
        }
        Ok(ManifoldSpec { kind, dim })
    }

    pub fn euclidean(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        ManifoldSpec {
            kind: ManifoldKind::Euclidean,
            dim,
        }
    }

    pub fn circle() -> Self {
        ManifoldSpec {
            kind: ManifoldKind::Circle,
            dim: 1,
        }
    }

    pub fn sphere(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        ManifoldSpec {
            kind: ManifoldKind::Sphere,
            dim,
        }
    }

    pub fn hyperbolic(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        ManifoldSpec {
            kind: ManifoldKind::Hyperbolic,
            dim,
        }
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sectional curvature. The circle carries the curvature of the unit
    /// sphere it is a great circle of.
    pub fn curvature(&self) -> f64 {
        match self.kind {
            ManifoldKind::Euclidean => 0.0,
            ManifoldKind::Circle | ManifoldKind::Sphere => 1.0,
            ManifoldKind::Hyperbolic => -1.0,
        }
    }

    pub fn injectivity_radius(&self) -> f64 {
        match self.kind {
            ManifoldKind::Circle | ManifoldKind::Sphere => PI,
            ManifoldKind::Euclidean | ManifoldKind::Hyperbolic => f64::INFINITY,
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.kind, ManifoldKind::Circle | ManifoldKind::Sphere)
    }

    /// Number of stored coordinates per point.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Euclidean => self.dim,
            ManifoldKind::Circle => 1,
            ManifoldKind::Sphere | ManifoldKind::Hyperbolic => self.dim + 1,
        }
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        let expected = self.ambient_dim();
        if v.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Checks the coordinate count and the defining equation of the model.
    pub fn validate(&self, p: &Point) -> Result<()> {
        self.check_len(p.coords())?;
        let x = p.coords();
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        match self.kind {
            ManifoldKind::Euclidean => Ok(()),
            ManifoldKind::Circle => {
                if x[0] > -PI && x[0] <= PI {
                    Ok(())
                } else {
                    Err(Error::InvalidPoint(format!("angle {} outside (−π, π]", x[0])))
                }
            }
            ManifoldKind::Sphere => {
                let n = norm2(x);
                if (n - 1.0).abs() <= UNIT_NORM_TOL {
                    Ok(())
                } else {
                    Err(Error::InvalidPoint(format!("norm {n} is not 1")))
                }
            }
            ManifoldKind::Hyperbolic => {
                let m = minkowski(x, x);
                if (m + 1.0).abs() <= UNIT_NORM_TOL * x[0].abs().max(1.0).powi(2) && x[0] >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidPoint(format!(
                        "Minkowski norm {m} with x₀ = {}",
                        x[0]
                    )))
                }
            }
        }
    }

    /// Canonical reference point: the origin, angle 0, or the first basis
    /// vector (north pole / hyperboloid apex).
    pub fn origin(&self) -> Point {
        let mut c = vec![0.0; self.ambient_dim()];
        if matches!(self.kind, ManifoldKind::Sphere | ManifoldKind::Hyperbolic) {
            c[0] = 1.0;
        }
        Point(c)
    }

    /// Riemannian norm of a tangent vector.
    pub fn tangent_norm(&self, v: &TangentVector) -> f64 {
        self.norm_of(&v.vec)
    }

    fn norm_of(&self, v: &[f64]) -> f64 {
        match self.kind {
            ManifoldKind::Circle => v[0].abs(),
            ManifoldKind::Hyperbolic => minkowski(v, v).max(0.0).sqrt(),
            _ => norm2(v),
        }
    }

    /// Geodesic distance.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_len(p.coords())?;
        self.check_len(q.coords())?;
        Ok(self.dist_raw(p.coords(), q.coords()))
    }

    pub(crate) fn dist_raw(&self, p: &[f64], q: &[f64]) -> f64 {
        match self.kind {
            ManifoldKind::Euclidean => p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            ManifoldKind::Circle => wrap_angle(q[0] - p[0]).abs(),
            ManifoldKind::Sphere => {
                // arccos(p·q) as 2·atan(|q − p| / |q + p|): exact at p = q and
                // well conditioned near 0 and π
                let (mut minus, mut plus) = (0.0, 0.0);
                for (a, b) in p.iter().zip(q) {
                    minus += (b - a) * (b - a);
                    plus += (b + a) * (b + a);
                }
                2.0 * minus.sqrt().atan2(plus.sqrt())
            }
            ManifoldKind::Hyperbolic => {
                // chord form 2 asinh(|q − p|_M / 2) for nearby points, where
                // arcosh(−⟨p,q⟩) loses precision; arcosh beyond, where the
                // chord suffers cancellation
                let diff: Vec<f64> = p.iter().zip(q).map(|(a, b)| b - a).collect();
                let chord2 = minkowski(&diff, &diff).max(0.0);
                if chord2 < 4.0 {
                    2.0 * (chord2.sqrt() / 2.0).asinh()
                } else {
                    (-minkowski(p, q)).max(1.0).acosh()
                }
            }
        }
    }

    /// Exponential map `exp_p(v)`: endpoint of the unit-time geodesic.
    pub fn exp_map(&self, v: &TangentVector) -> Result<Point> {
        self.check_len(v.base.coords())?;
        self.check_len(&v.vec)?;
        Ok(Point(self.exp_raw(v.base.coords(), &v.vec)))
    }

    pub(crate) fn exp_raw(&self, p: &[f64], v: &[f64]) -> Vec<f64> {
        match self.kind {
            ManifoldKind::Euclidean => p.iter().zip(v).map(|(a, b)| a + b).collect(),
            ManifoldKind::Circle => vec![wrap_angle(p[0] + v[0])],
            ManifoldKind::Sphere => {
                let t = norm2(v);
                if t == 0.0 {
                    return p.to_vec();
                }
                let (s, c) = t.sin_cos();
                let mut y: Vec<f64> = p.iter().zip(v).map(|(a, b)| c * a + s * b / t).collect();
                let n = norm2(&y);
                y.iter_mut().for_each(|c| *c /= n);
                y
            }
            ManifoldKind::Hyperbolic => {
                let t = minkowski(v, v).max(0.0).sqrt();
                if t == 0.0 {
                    return p.to_vec();
                }
                let (s, c) = (t.sinh(), t.cosh());
                let mut y: Vec<f64> = p.iter().zip(v).map(|(a, b)| c * a + s * b / t).collect();
                // back onto the upper sheet
                y[0] = (1.0 + dot(&y[1..], &y[1..])).sqrt();
                y
            }
        }
    }

    /// Logarithm map `log_p(q)`, the inverse of `exp_p` inside the injectivity
    /// radius. Fails on the cut locus (antipodal points of the circle/sphere).
    pub fn log_map(&self, p: &Point, q: &Point) -> Result<TangentVector> {
        self.check_len(p.coords())?;
        self.check_len(q.coords())?;
        let vec = self.log_raw(p.coords(), q.coords())?;
        Ok(TangentVector {
            base: p.clone(),
            vec,
        })
    }

    pub(crate) fn log_raw(&self, p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            ManifoldKind::Euclidean => Ok(q.iter().zip(p).map(|(a, b)| a - b).collect()),
            ManifoldKind::Circle => {
                let d = wrap_angle(q[0] - p[0]);
                if PI - d.abs() <= CUT_LOCUS_TOL {
                    return Err(Error::CutLocus { distance: d.abs() });
                }
                Ok(vec![d])
            }
            ManifoldKind::Sphere => {
                let d = self.dist_raw(p, q);
                if PI - d <= CUT_LOCUS_TOL {
                    return Err(Error::CutLocus { distance: d });
                }
                let c = dot(p, q);
                let u: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - c * b).collect();
                let un = norm2(&u);
                if un == 0.0 || d == 0.0 {
                    return Ok(vec![0.0; p.len()]);
                }
                Ok(u.iter().map(|x| x * d / un).collect())
            }
            ManifoldKind::Hyperbolic => {
                let d = self.dist_raw(p, q);
                if d == 0.0 {
                    return Ok(vec![0.0; p.len()]);
                }
                let c = minkowski(p, q);
                let mut u: Vec<f64> = q.iter().zip(p).map(|(a, b)| a + c * b).collect();
                // remove rounding drift out of the tangent space
                let drift = minkowski(p, &u);
                u.iter_mut().zip(p).for_each(|(x, b)| *x += drift * b);
                let un = minkowski(&u, &u).max(0.0).sqrt();
                if un == 0.0 {
                    return Ok(vec![0.0; p.len()]);
                }
                Ok(u.iter().map(|x| x * d / un).collect())
            }
        }
    }

    /// A random point. Uniform on the circle and sphere; the canonical
    /// [`origin`](Self::origin) on the non-compact kinds, whose isometry group
    /// acts transitively so no base point is special.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self.kind {
            ManifoldKind::Circle => {
                // (−π, π]
                let u: f64 = rng.random();
                Point(vec![PI - 2.0 * PI * u])
            }
            ManifoldKind::Sphere => loop {
                let g: Vec<f64> = (0..self.ambient_dim())
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let n = norm2(&g);
                if n > 1e-12 {
                    break Point(g.into_iter().map(|x| x / n).collect());
                }
            },
            ManifoldKind::Euclidean | ManifoldKind::Hyperbolic => self.origin(),
        }
    }

    /// Isotropic Gaussian tangent vector at `p` with standard deviation
    /// `scale` along every tangent direction.
    pub fn random_tangent<R: Rng + ?Sized>(&self, p: &Point, scale: f64, rng: &mut R) -> TangentVector {
        let vec = self.random_tangent_raw(p.coords(), scale, rng);
        TangentVector {
            base: p.clone(),
            vec,
        }
    }

    pub(crate) fn random_tangent_raw<R: Rng + ?Sized>(&self, p: &[f64], scale: f64, rng: &mut R) -> Vec<f64> {
        let mut normal = || scale * rng.sample::<f64, _>(StandardNormal);
        match self.kind {
            ManifoldKind::Euclidean | ManifoldKind::Circle => (0..p.len()).map(|_| normal()).collect(),
            ManifoldKind::Sphere => {
                // orthogonal projection of an isotropic ambient normal
                let g: Vec<f64> = (0..p.len()).map(|_| normal()).collect();
                let c = dot(&g, p);
                g.iter().zip(p).map(|(a, b)| a - c * b).collect()
            }
            ManifoldKind::Hyperbolic => {
                // isotropic at the apex, then parallel transport to p
                let mut u = vec![0.0; p.len()];
                u[1..].iter_mut().for_each(|x| *x = normal());
                let coef = minkowski(p, &u) / (1.0 + p[0]);
                let mut v: Vec<f64> = u.iter().zip(p).map(|(a, b)| a + coef * b).collect();
                v[0] += coef;
                v
            }
        }
    }

    /// Unit tangent vector at `p` with uniformly distributed direction.
    pub fn random_unit_tangent<R: Rng + ?Sized>(&self, p: &Point, rng: &mut R) -> TangentVector {
        loop {
            let mut v = self.random_tangent(p, 1.0, rng);
            let n = self.tangent_norm(&v);
            if n > 1e-12 {
                v.vec.iter_mut().for_each(|x| *x /= n);
                return v;
            }
        }
    }

    /// A point at geodesic distance `delta` from `p` in a uniformly random
    /// direction.
    pub fn random_point_at_distance<R: Rng + ?Sized>(&self, p: &Point, delta: f64, rng: &mut R) -> Result<Point> {
        self.check_len(p.coords())?;
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::param("delta", format!("{delta} must be positive and finite")));
        }
        if delta >= self.injectivity_radius() {
            return Err(Error::param(
                "delta",
                format!("{delta} must be below the injectivity radius {}", self.injectivity_radius()),
            ));
        }
        let mut u = self.random_unit_tangent(p, rng);
        u.vec.iter_mut().for_each(|x| *x *= delta);
        self.exp_map(&u)
    }

    /// `n` points from the geodesic ball `B_r(center)`: uniform direction and
    /// radius density proportional to the volume element `s(t)^{d−1}`
    /// (`s = sin`, identity or `sinh`), i.e. uniform w.r.t. volume.
    pub fn sample_ball<R: Rng + ?Sized>(&self, center: &Point, r: f64, n: usize, rng: &mut R) -> Result<Vec<Point>> {
        self.check_len(center.coords())?;
        if !(r > 0.0) || r.is_nan() || (self.is_compact() && r >= self.injectivity_radius() / 2.0) || r.is_infinite() {
            return Err(Error::param(
                "r",
                format!("{r} must be positive and below half the injectivity radius"),
            ));
        }
        let d = self.dim as i32;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            // t^{d−1} proposal on [0, r], corrected by rejection
            let u: f64 = rng.random();
            let t = r * u.powf(1.0 / self.dim as f64);
            let accept = match self.kind {
                ManifoldKind::Euclidean | ManifoldKind::Circle => 1.0,
                ManifoldKind::Sphere => {
                    if t == 0.0 {
                        1.0
                    } else {
                        (t.sin() / t).powi(d - 1)
                    }
                }
                ManifoldKind::Hyperbolic => {
                    if t == 0.0 {
                        (r / r.sinh()).powi(d - 1)
                    } else {
                        ((t.sinh() / t) / (r.sinh() / r)).powi(d - 1)
                    }
                }
            };
            if accept < 1.0 && rng.random::<f64>() >= accept {
                continue;
            }
            let mut dir = self.random_unit_tangent(center, rng);
            dir.vec.iter_mut().for_each(|x| *x *= t);
            out.push(self.exp_map(&dir)?);
        }
        Ok(out)
    }
}

impl fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind, self.dim)
    }
}
