//! Randomized invariants across the public API.

use fracmix::fracsolve::{cutoff_apply, frac_apply, frac_solve, highpass_frac_solve, CutoffProfile, Verdict};
use fracmix::mixsched::{higher_order_bound, random_configuration, sweep_rng};
use fracmix::rootsys::{
    build_root_system, eta_epsilon, find_maximal_sos, CartanElement, Family, RootSystem, SpectralGapProfile,
};
use fracmix::sl2model::{flow_apply, make_grid, Flow, GridConfig, IrrepParams, ModelVector, Profile};
use fracmix::Complex64;
use proptest::prelude::*;

fn vector(varpi: f64, a: f64, b: f64) -> (IrrepParams, ModelVector) {
    let ir = IrrepParams::complementary_varpi(varpi).unwrap();
    let g = make_grid(GridConfig { ratio: 1.1, ..Default::default() }, &ir).unwrap();
    (ir, ModelVector::from_profile(g, Profile::gaussian(a, b)))
}

fn rel(a: &ModelVector, b: &ModelVector) -> f64 {
    a.max_abs_diff(b) / b.max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geodesic_flow_is_a_unitary_group(varpi in 0.2f64..0.8, s1 in -1.5f64..1.5, s2 in -1.5f64..1.5, b in -1.0f64..1.0) {
        let (ir, v) = vector(varpi, 1.0, b);
        let once = flow_apply(&v, Flow::Geodesic(s1 + s2), &ir).unwrap().vector;
        let twice = flow_apply(&flow_apply(&v, Flow::Geodesic(s2), &ir).unwrap().vector, Flow::Geodesic(s1), &ir)
            .unwrap()
            .vector;
        prop_assert!(rel(&twice, &once) < 1e-12);
        prop_assert!((once.norm_sq() / v.norm_sq() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn horocycle_is_unitary(varpi in 0.2f64..0.8, t in -50.0f64..50.0) {
        let (ir, v) = vector(varpi, 1.0, 0.5);
        let w = flow_apply(&v, Flow::Horocycle(t), &ir).unwrap().vector;
        prop_assert!((w.norm_sq() / v.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fractional_powers_compose(r1 in 0.0f64..1.5, r2 in 0.0f64..1.5, b in -1.0f64..1.0) {
        let (_, v) = vector(0.5, 2.0, b);
        let lhs = frac_apply(&frac_apply(&v, r1).unwrap(), r2).unwrap();
        prop_assert!(rel(&lhs, &frac_apply(&v, r1 + r2).unwrap()) < 1e-12);
    }

    #[test]
    fn cutoff_pieces_sum_to_identity(scale in 0.01f64..10.0, q in 0.1f64..3.0) {
        let (_, v) = vector(0.5, 1.0, 0.0);
        let p = CutoffProfile { scale };
        let low = cutoff_apply(&v, &p);
        let omega = highpass_frac_solve(&v, q, &p).unwrap().solution.unwrap();
        let high = frac_apply(&omega, q).unwrap();
        let sum: Vec<Complex64> = low.values.iter().zip(&high.values).map(|(a, b)| a + b).collect();
        prop_assert!(rel(&v.with_values(sum), &v) < 1e-12);
        prop_assert!(low.norm() <= v.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn verdict_is_monotone_in_r(varpi in 0.3f64..0.7) {
        let (ir, v) = vector(varpi, 1.0, 0.0);
        let gamma = (1.0 - varpi) / 2.0;
        prop_assert_eq!(frac_solve(&v, gamma - 0.03, &ir).unwrap().verdict, Verdict::Solvable);
        prop_assert_eq!(frac_solve(&v, gamma + 0.03, &ir).unwrap().verdict, Verdict::Divergent);
    }

    #[test]
    fn eta_is_weyl_invariant(x in prop::collection::vec(-4.0f64..4.0, 3), k in 0usize..9) {
        let rs: RootSystem = build_root_system(Family::B, 3).unwrap();
        let s = find_maximal_sos(&rs).unwrap();
        let gaps = SpectralGapProfile::uniform(0.5, s.len()).unwrap();
        let a = CartanElement::new(x.clone());
        let root = &rs.positive_roots[k % rs.positive_roots.len()];
        let moved = CartanElement::new(RootSystem::reflect(root, &x));
        let e1 = eta_epsilon(&s, &a, &gaps, 0.1, &rs).unwrap();
        let e2 = eta_epsilon(&s, &moved, &gaps, 0.1, &rs).unwrap();
        prop_assert!((e1 - e2).abs() <= 1e-12 * e1.max(e2));
        prop_assert!(e1 > 0.0 && e1 <= 1.0);
    }

    #[test]
    fn bound_kernel_is_a_probability_scale(seed in any::<u64>(), n in 2usize..7, rank in 1usize..4) {
        let c = random_configuration(&mut sweep_rng(seed), n, rank).unwrap();
        let b = higher_order_bound(&c, 0.01, 1.0).unwrap();
        prop_assert!(b.kernel > 0.0 && b.kernel <= 1.0);
        prop_assert!((b.exponent - 1.0 / ((n - 1) * c.sos.len()) as f64).abs() < 1e-15);
    }
}
