use std::f64::consts::PI;

use rand::SeedableRng;
use riemann_gdp::mechanisms::{
    frechet_mean, frechet_sensitivity, gaussian_mechanism, DatasetSpec, FrechetOptions, LaplaceMechanism,
};
use riemann_gdp::calibration::CalibrationConfig;
use riemann_gdp::seed::{stream, StreamRng};
use riemann_gdp::{ManifoldSpec, Point};

fn ball_dataset(m: ManifoldSpec, r: f64, n: usize, rng: &mut StreamRng) -> DatasetSpec {
    let center = m.random_point(rng);
    let pts = m.sample_ball(&center, r, n, rng).unwrap();
    DatasetSpec::new(m, pts, center, r).unwrap()
}

fn mean_gradient_norm(m: &ManifoldSpec, x: &Point, pts: &[Point]) -> f64 {
    let mut g = vec![0.0; x.len()];
    for p in pts {
        let v = m.log_map(x, p).unwrap();
        g.iter_mut().zip(&v.vec).for_each(|(a, b)| *a += b / pts.len() as f64);
    }
    m.tangent_norm(&riemann_gdp::TangentVector::new(x.clone(), g))
}

#[test]
fn empirical_sensitivity_respects_the_bound() {
    let s = ManifoldSpec::sphere(2);
    let bound = frechet_sensitivity(PI / 8.0, 1.0, 10).unwrap();
    let opts = FrechetOptions::default();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let mut rng = stream(42, "test/sensitivity", i);
        let d = ball_dataset(s, PI / 8.0, 10, &mut rng);
        let d2 = d.neighbor(&mut rng).unwrap();
        let gap = s
            .distance(&frechet_mean(&d, &opts).unwrap(), &frechet_mean(&d2, &opts).unwrap())
            .unwrap();
        worst = worst.max(gap);
    }
    assert!(worst <= bound, "{worst} > {bound}");
}

#[test]
fn frechet_mean_converges_inside_the_ball() {
    let opts = FrechetOptions::default();
    for m in [ManifoldSpec::sphere(2), ManifoldSpec::sphere(5), ManifoldSpec::hyperbolic(3), ManifoldSpec::circle()] {
        for i in 0..50 {
            let mut rng = stream(7, "test/frechet", i);
            let d = ball_dataset(m, 0.6, 12, &mut rng);
            let x = frechet_mean(&d, &opts).unwrap();
            assert!(mean_gradient_norm(&m, &x, d.points()) < 1e-8, "{:?}", m.kind());
            assert!(m.distance(d.center(), &x).unwrap() <= d.radius());
        }
    }
}

#[test]
fn neighbours_differ_in_one_point() {
    let s = ManifoldSpec::sphere(2);
    let mut rng = stream(1, "test/neighbour", 0);
    let d = ball_dataset(s, 0.3, 10, &mut rng);
    let d2 = d.neighbor(&mut rng).unwrap();
    let changed = d.points().iter().zip(d2.points()).filter(|(a, b)| a != b).count();
    assert_eq!(changed, 1);
    assert_eq!(d2.center(), d.center());
}

#[test]
fn euclidean_gaussian_budget_matches_closed_form() {
    let e = ManifoldSpec::euclidean(2);
    let cfg = CalibrationConfig::new(0.3, 1.2, 0);
    let out = gaussian_mechanism(&e.origin(), e, &cfg, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3)).unwrap();
    assert!((out.budget.mu() - 0.25).abs() < 1e-15);
    assert_eq!(out.noise_param, 1.2);
}

#[test]
fn laplace_release_is_concentrated_for_large_epsilon() {
    let s = ManifoldSpec::sphere(2);
    let mech = LaplaceMechanism::new(s, 0.01, 1.0).unwrap();
    let xbar = s.origin();
    let mut rng = stream(5, "test/laplace", 0);
    for _ in 0..20 {
        let out = mech.release(&xbar, &mut rng).unwrap();
        assert!(s.distance(&xbar, &out.released).unwrap() < 0.2);
        s.validate(&out.released).unwrap();
    }
}
