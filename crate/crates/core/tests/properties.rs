use std::f64::consts::TAU;

use kuramoto_core::graph::{deviation_norm_exact, deviation_norm_heuristic, gen_erdos_renyi};
use kuramoto_core::particle::{drift, OscillatorState};
use kuramoto_core::torus::{
    bl_lower_bound, empirical_spectrum, hminus1_distance, wrap, wrap_all, MeasureRef, TorusAngle,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn angles(max_len: usize) -> impl Strategy<Value = Vec<TorusAngle>> {
    prop::collection::vec(0.0..TAU, 1..max_len).prop_map(|xs| wrap_all(&xs).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn wrap_lands_in_range(x in -1e6f64..1e6) {
        let a = wrap(x).unwrap().value();
        prop_assert!((0.0..TAU).contains(&a));
        let k = ((x - a) / TAU).round();
        prop_assert!((x - a - k * TAU).abs() <= 1e-9 * x.abs().max(1.0));
    }

    #[test]
    fn moments_are_bounded(a in angles(50), order in 1usize..40) {
        let s = empirical_spectrum(&a, order).unwrap();
        prop_assert!(s.moments().iter().all(|m| m.norm() <= 1.0 + 1e-12));
    }

    #[test]
    fn rotation_covariance(a in angles(40), alpha in 0.0..TAU) {
        let order = 16;
        let rotated: Vec<TorusAngle> = a.iter().map(|x| x.rotate(alpha)).collect();
        let s = empirical_spectrum(&a, order).unwrap();
        let r = empirical_spectrum(&rotated, order).unwrap();
        for l in 1..=order {
            let expected = Complex64::from_polar(1.0, l as f64 * alpha) * s.moment(l);
            let diff = (r.moment(l) - expected).norm();
            prop_assert!(diff <= 1e-12 * expected.norm().max(1.0), "l={} diff={}", l, diff);
        }
    }

    #[test]
    fn triangle_inequality(a in angles(30), b in angles(30), c in angles(30)) {
        let order = 32;
        let (sa, sb, sc) = (
            empirical_spectrum(&a, order).unwrap(),
            empirical_spectrum(&b, order).unwrap(),
            empirical_spectrum(&c, order).unwrap(),
        );
        let ab = hminus1_distance(&sa, &sb).unwrap().value;
        let bc = hminus1_distance(&sb, &sc).unwrap().value;
        let ac = hminus1_distance(&sa, &sc).unwrap().value;
        prop_assert!(ac <= ab + bc + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn test_function_bound_below_truncated_distance_plus_tail(
        a in angles(40),
        b in angles(40),
        seed in any::<u64>(),
    ) {
        let order = 64;
        let d = hminus1_distance(
            &empirical_spectrum(&a, order).unwrap(),
            &empirical_spectrum(&b, order).unwrap(),
        ).unwrap();
        let lower = bl_lower_bound(MeasureRef::Atoms(&a), MeasureRef::Atoms(&b), 20, seed).unwrap();
        prop_assert!(lower <= d.upper(), "{} > {}", lower, d.upper());
    }

    #[test]
    fn heuristic_never_exceeds_exact(n in 2usize..11, p in 0.1f64..0.9, seed in any::<u64>(), sym in any::<bool>()) {
        let g = gen_erdos_renyi(n, p, seed, sym).unwrap();
        let exact = deviation_norm_exact(&g).unwrap().value;
        let heuristic = deviation_norm_heuristic(&g, 8, seed ^ 1).unwrap().value;
        prop_assert!(heuristic <= exact);
    }

    #[test]
    fn drift_depends_only_on_differences(
        a in angles(30),
        alpha in 0.0..TAU,
        seed in any::<u64>(),
    ) {
        let n = a.len().max(2);
        let mut a = a;
        a.resize(n, TorusAngle::ZERO);
        let g = gen_erdos_renyi(n, 0.5, seed, false).unwrap();
        let rotated: Vec<TorusAngle> = a.iter().map(|x| x.rotate(alpha)).collect();
        let d0 = drift(&OscillatorState::new(a), &g, 1.7).unwrap();
        let d1 = drift(&OscillatorState::new(rotated), &g, 1.7).unwrap();
        for (x, y) in d0.iter().zip(&d1) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}
