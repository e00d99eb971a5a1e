use proptest::prelude::*;
use wildflow::geometry::{
    direction, dist_to_k, hull_margin, k_point, select_extreme_points, wave_direction, ConstraintParams, StatePoint,
};

fn params() -> impl Strategy<Value = ConstraintParams> {
    (0.3f64..3.0, 0.1f64..1.5).prop_map(|(rho, q)| ConstraintParams::new(rho, q).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_points_lie_on_k_and_on_the_hull_boundary(p in params(), angle in 0.0f64..std::f64::consts::TAU) {
        let w = k_point(&p, &direction(2, &[angle])[..2]);
        prop_assert!(dist_to_k(&w, &p) <= 1e-9 * (1.0 + w.norm()));
        prop_assert!(hull_margin(&w, &p).abs() <= 1e-9 * (1.0 + p.rho * p.q));
    }

    #[test]
    fn decompositions_reproduce_their_target(p in params(), c in prop::array::uniform4(-1.0f64..1.0), s in 0.05f64..0.95, seed in 0u64..1000) {
        let w = StatePoint::from_coords(2, &c).unwrap();
        let scale = (p.rho * p.q).sqrt();
        let w = w.scale(s * scale / (1.0 + w.norm()));
        prop_assume!(hull_margin(&w, &p) > 1e-3 * p.rho * p.q);

        let dec = select_extreme_points(&w, &p, seed).unwrap();
        prop_assert!((dec.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        prop_assert!(dec.weights.iter().all(|&mu| mu > 0.0));
        let mut sum = StatePoint::zero(2);
        for (v, mu) in dec.vertices.iter().zip(&dec.weights) {
            prop_assert!(dist_to_k(v, &p) <= 1e-9 * (1.0 + v.norm()));
            sum = sum.axpy(*mu, v);
        }
        prop_assert!(sum.dist(&w) <= 1e-9 * (1.0 + w.norm()));

        let d = wave_direction(&dec.vertices[0], &dec.vertices[1], p.rho).unwrap();
        prop_assert!(d.compatibility_defect() <= 1e-9 * (1.0 + d.profile.norm()));
    }

    #[test]
    fn the_hull_is_star_shaped_about_the_origin(p in params(), c in prop::array::uniform4(-2.0f64..2.0), t in 0.0f64..1.0) {
        let w = StatePoint::from_coords(2, &c).unwrap();
        prop_assume!(hull_margin(&w, &p) > 0.0);
        prop_assert!(hull_margin(&w.scale(t), &p) >= -1e-12);
    }
}
