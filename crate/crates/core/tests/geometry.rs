use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riemann_gdp::{ManifoldSpec, Point, TangentVector};

fn kinds() -> [ManifoldSpec; 5] {
    [
        ManifoldSpec::euclidean(3),
        ManifoldSpec::circle(),
        ManifoldSpec::sphere(2),
        ManifoldSpec::sphere(4),
        ManifoldSpec::hyperbolic(3),
    ]
}

// spread over the whole space when compact; otherwise near the apex, since far
// out the ambient coordinates grow like cosh(r) and round-trip error with them
fn point(m: &ManifoldSpec, rng: &mut ChaCha8Rng) -> Point {
    if m.is_compact() {
        m.random_point(rng)
    } else {
        m.exp_map(&m.random_tangent(&m.origin(), 0.6, rng)).unwrap()
    }
}

fn scaled(mut v: TangentVector, s: f64) -> TangentVector {
    v.vec.iter_mut().for_each(|x| *x *= s);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metric_axioms(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in kinds() {
            let (x, y, z) = (point(&m, &mut rng), point(&m, &mut rng), point(&m, &mut rng));
            let dxy = m.distance(&x, &y).unwrap();
            let dyx = m.distance(&y, &x).unwrap();
            let dyz = m.distance(&y, &z).unwrap();
            let dxz = m.distance(&x, &z).unwrap();
            prop_assert!(dxy >= 0.0);
            prop_assert_eq!(m.distance(&x, &x).unwrap(), 0.0);
            prop_assert!((dxy - dyx).abs() <= 1e-12 * (1.0 + dxy));
            prop_assert!(dxz <= dxy + dyz + 1e-9, "{:?}: {} > {} + {}", m.kind(), dxz, dxy, dyz);
            prop_assert!(dxy <= m.injectivity_radius() + 1e-12);
        }
    }

    #[test]
    fn log_inverts_exp(seed in any::<u64>(), len in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in kinds() {
            let p = point(&m, &mut rng);
            let v = scaled(m.random_unit_tangent(&p, &mut rng), len);
            let q = m.exp_map(&v).unwrap();
            let w = m.log_map(&p, &q).unwrap();
            for (a, b) in v.vec.iter().zip(&w.vec) {
                prop_assert!((a - b).abs() < 1e-9, "{:?}: {:?} vs {:?}", m.kind(), v.vec, w.vec);
            }
            let d = m.distance(&p, &q).unwrap();
            prop_assert!((m.tangent_norm(&v) - d).abs() < 1e-10, "{:?}: |v|={} d={}", m.kind(), len, d);
        }
    }

    #[test]
    fn exp_inverts_log(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in kinds() {
            let p = point(&m, &mut rng);
            let q = point(&m, &mut rng);
            if m.distance(&p, &q).unwrap() > m.injectivity_radius() - 1e-6 {
                continue;
            }
            let back = m.exp_map(&m.log_map(&p, &q).unwrap()).unwrap();
            let err = m.distance(&back, &q).unwrap();
            prop_assert!(err < 1e-9, "{:?}: {:?} -> {:?}, err {}", m.kind(), q, back, err);
            m.validate(&back).unwrap();
        }
    }

    #[test]
    fn points_at_distance(seed in any::<u64>(), delta in 0.01f64..3.1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in kinds() {
            let p = point(&m, &mut rng);
            let q = m.random_point_at_distance(&p, delta, &mut rng).unwrap();
            prop_assert!((m.distance(&p, &q).unwrap() - delta).abs() < 1e-10);
        }
    }
}

#[test]
fn sphere_distance_is_accurate_near_zero_and_pi() {
    let s = ManifoldSpec::sphere(2);
    let p = s.origin();
    for t in [1e-12f64, 1e-8, 1e-4, std::f64::consts::PI - 1e-6] {
        let q = Point::new(vec![t.cos(), t.sin(), 0.0]);
        let d = s.distance(&p, &q).unwrap();
        assert!((d - t).abs() <= 1e-15 * t.max(1.0) * 4.0, "{t}: {d}");
    }
}

#[test]
fn hyperbolic_distance_on_a_geodesic() {
    let h = ManifoldSpec::hyperbolic(2);
    for t in [1e-10f64, 0.5, 3.0, 12.0] {
        let q = Point::new(vec![t.cosh(), t.sinh(), 0.0]);
        let d = h.distance(&h.origin(), &q).unwrap();
        assert!((d - t).abs() <= 1e-12 * t.max(1.0), "{t}: {d}");
    }
}

#[test]
fn ball_samples_stay_in_the_ball() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in kinds() {
        let c = point(&m, &mut rng);
        let r = 0.7;
        for p in m.sample_ball(&c, r, 300, &mut rng).unwrap() {
            m.validate(&p).unwrap();
            assert!(m.distance(&c, &p).unwrap() <= r + 1e-12);
        }
    }
}
