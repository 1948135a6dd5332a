//! End-to-end runs across modules.

use fracmix::decay::{coeff_curve, fit_rate, linspace, FlowKind, DEFAULT_LOSS_BUDGET};
use fracmix::directint::{typeii_solve, DirectIntegralModel, TensorModel, TensorVector, TypeIIProblem};
use fracmix::fracsolve::{classical_solve, frac_solve, highpass_frac_solve, CutoffProfile, Verdict};
use fracmix::mixsched::{
    build_partition, choose_root_index, higher_order_bound, order_for_partition, partition_tree, triple_bound,
    verify_partition, GapConfiguration,
};
use fracmix::rootsys::{
    build_root_system, find_maximal_sos, CartanElement, Family, FieldLabel, SpectralGapProfile,
};
use fracmix::sl2model::{make_grid, slow_profile, GridConfig, IrrepParams, ModelVector, Profile};
use fracmix::{Complex64, Error};

#[test]
fn geodesic_rate_tracks_the_gap() {
    for varpi in [0.3, 0.7] {
        let ir = IrrepParams::complementary_varpi(varpi).unwrap();
        let v = ModelVector::from_profile(make_grid(GridConfig::default(), &ir).unwrap(), slow_profile(&ir));
        let c = coeff_curve(&v, &v, FlowKind::Geodesic, &linspace(0.0, 6.0, 61), &ir, DEFAULT_LOSS_BUDGET).unwrap();
        let rate = fit_rate(&c).unwrap().exponent;
        assert!((rate - ir.optimal_rate()).abs() < 0.02 * ir.optimal_rate(), "{varpi}: {rate}");
    }
}

#[test]
fn solvability_flips_at_the_gap() {
    let ir = IrrepParams::complementary_varpi(0.5).unwrap();
    let v = ModelVector::from_profile(make_grid(GridConfig::default(), &ir).unwrap(), slow_profile(&ir));
    assert_eq!(frac_solve(&v, 0.2, &ir).unwrap().verdict, Verdict::Solvable);
    assert_eq!(frac_solve(&v, 0.3, &ir).unwrap().verdict, Verdict::Divergent);
    // Removing low frequencies makes every order solvable.
    let hp = highpass_frac_solve(&v, 3.0, &CutoffProfile { scale: 0.5 }).unwrap();
    assert!(hp.is_solvable() && hp.solution_norm.unwrap().is_finite());
}

#[test]
fn classical_solve_needs_second_order_vanishing() {
    let ir = IrrepParams::discrete(2).unwrap();
    let g = make_grid(GridConfig::default(), &ir).unwrap();
    let first = ModelVector::from_profile(g.clone(), Profile::power_gaussian(1, 1.0, 0.0));
    let second = ModelVector::from_profile(g, Profile::power_gaussian(2, 1.0, 0.0));
    assert_eq!(classical_solve(&first, &ir).unwrap().verdict, Verdict::Obstructed);
    assert!(classical_solve(&second, &ir).unwrap().is_solvable());
}

#[test]
fn type_ii_with_a_complex_factor() {
    let a = IrrepParams::complementary_varpi(0.5).unwrap();
    let b = IrrepParams::complementary_varpi(0.3).unwrap();
    let m = TensorModel::new(
        vec![DirectIntegralModel::single(a), DirectIntegralModel::single(b).with_field(FieldLabel::C)],
        GridConfig { ratio: 1.1, ..Default::default() },
        0.05,
    )
    .unwrap();
    let g = Profile::gaussian(1.0, 0.0);
    let xi = TensorVector::from_profiles(&m, &[0, 0], Complex64::new(0.0, 1.0), &[g.clone(), g]).unwrap();
    let run = typeii_solve(&xi, &TypeIIProblem::new(vec![0.2, 0.3], &m).unwrap(), &m).unwrap();
    assert_eq!(run.branches.len(), 2);
    assert!(run.reconstruction_error < 1e-12);
    assert!(run.mapping_note.is_some());
    let err = typeii_solve(&xi, &TypeIIProblem::new(vec![0.2, 0.36], &m).unwrap(), &m).unwrap_err();
    assert!(matches!(err, Error::Precondition { factor: 2, .. }));
}

fn b2(points: &[[f64; 2]]) -> GapConfiguration {
    let rs = build_root_system(Family::B, 2).unwrap();
    let sos = find_maximal_sos(&rs).unwrap();
    let gaps = SpectralGapProfile::uniform(0.5, 2).unwrap();
    GapConfiguration::new(rs, sos, gaps, points.iter().map(|p| CartanElement::new(p.to_vec())).collect(), Some(1.0))
        .unwrap()
}

#[test]
fn scheduler_on_a_hand_configuration() {
    let c = b2(&[[0.0, 0.0], [5.0, 1.0], [4.5, 0.5], [1.0, 0.2], [9.0, 0.0]]);
    let order = order_for_partition(&c).unwrap();
    assert_eq!((order[0], *order.last().unwrap()), (0, 4));
    let choice = choose_root_index(&c, &order, 0.05).unwrap();
    let plan = build_partition(&c, &order, &choice).unwrap();
    let v = verify_partition(&plan, &c);
    assert!(v.ok, "{:?}", v.violations);
    let tree = partition_tree(&c, 0.05).unwrap();
    assert!(tree.depth() <= c.n());
    assert_eq!(tree.leaves().len(), c.n());
    let bound = higher_order_bound(&c, 0.05, 1.0).unwrap();
    assert!(bound.kernel > 0.0 && bound.kernel <= 1.0);
    assert_eq!(bound.penalty_factor, Some(1.0 + 9.0));
    let t = triple_bound(&b2(&[[0.0, 0.0], [3.0, 0.0], [9.0, 0.0]]), 0.05).unwrap();
    assert_eq!(t.pair, (0, 2));
    assert!(t.case.is_some());
    assert!(t.split_bound <= t.max_gap_bound);
}

#[test]
fn grids_reject_mismatched_series() {
    let c = IrrepParams::complementary_varpi(0.5).unwrap();
    let d = IrrepParams::discrete(3).unwrap();
    let g = make_grid(GridConfig::default(), &c).unwrap();
    let v = ModelVector::from_profile(g, Profile::gaussian(1.0, 0.0));
    assert!(matches!(frac_solve(&v, 0.2, &d), Err(Error::Domain(_))));
}
