//! One test per acceptance criterion; each prints a single summary line
//! (visible with `--nocapture`) and asserts the pinned tolerance.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use fracmix::decay::{
    coeff_curve, fit_rate, geomspace, linspace, order2_bound_check, product_grid, FlowKind, DEFAULT_LOSS_BUDGET,
};
use fracmix::directint::{
    sharpness_witness, typeii_estimate_check, typeii_solve, DirectIntegralModel, TensorModel, TensorVector, TypeIIProblem,
};
use fracmix::fracsolve::{conjugation_scaling_check, tauberian_check, threshold_scan, TauProfile, TauberianConfig, Verdict};
use fracmix::mixsched::partition_sweep;
use fracmix::rootsys::{
    build_root_system, eta_epsilon, find_maximal_sos, holder_gamma, mixing_exponent, regularity_exponents,
    CartanElement, Family, FieldLabel, Root, RootSystem, SpectralGapProfile, StronglyOrthogonalSystem,
};
use fracmix::selftest::run_selftest;
use fracmix::sl2model::{make_grid, slow_profile, GridConfig, IrrepParams, ModelVector, Profile};
use fracmix::Complex64;
use rand::{Rng, SeedableRng};

fn report(n: u32, pass: bool, detail: String) {
    println!("criterion {n:>2}: {}  {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn slow_vector(ir: &IrrepParams, grid: GridConfig) -> ModelVector {
    ModelVector::from_profile(make_grid(grid, ir).unwrap(), slow_profile(ir))
}

fn geodesic_fit(ir: &IrrepParams) -> (f64, Duration) {
    let t = Instant::now();
    let v = slow_vector(ir, GridConfig::default());
    let c = coeff_curve(&v, &v, FlowKind::Geodesic, &linspace(0.0, 6.0, 61), ir, DEFAULT_LOSS_BUDGET).unwrap();
    (fit_rate(&c).unwrap().exponent, t.elapsed())
}

#[test]
fn criterion_01_complementary_geodesic_decay() {
    let mut ok = true;
    let mut parts = Vec::new();
    for varpi in [0.4, 0.5, 0.6] {
        let (rate, dt) = geodesic_fit(&IrrepParams::complementary_varpi(varpi).unwrap());
        let target = (1.0 - varpi) / 2.0;
        let rel = (rate - target).abs() / target;
        ok &= rel < 0.05 && dt < Duration::from_secs(10);
        parts.push(format!("varpi={varpi}: {rate:.4} vs {target} (rel {rel:.2e}, {:.2}s)", dt.as_secs_f64()));
    }
    report(1, ok, parts.join("; "));
}

#[test]
fn criterion_02_discrete_series_decay() {
    let (rate, dt) = geodesic_fit(&IrrepParams::discrete(2).unwrap());
    let rel = (rate - 1.0).abs();
    report(2, rel < 0.10 && dt < Duration::from_secs(10), format!("n=2: {rate:.4} vs 1 (rel {rel:.2e}, {:.2}s)", dt.as_secs_f64()));
}

#[test]
fn criterion_03_horocycle_decay() {
    let ir = IrrepParams::complementary_varpi(0.5).unwrap();
    let v = slow_vector(&ir, GridConfig::default());
    let c = coeff_curve(&v, &v, FlowKind::Horocycle, &geomspace(5.0, 200.0, 40), &ir, DEFAULT_LOSS_BUDGET).unwrap();
    let rate = fit_rate(&c).unwrap().exponent;
    let rel = (rate - 0.5).abs() / 0.5;
    report(3, rel < 0.10, format!("varpi=0.5: {rate:.4} vs 0.5 (rel {rel:.2e})"));
}

#[test]
fn criterion_04_threshold_sharpness() {
    let mut ok = true;
    let mut parts = Vec::new();
    let r_grid: Vec<f64> = (1..=60).map(|i| i as f64 / 100.0).collect();
    for varpi in [0.4, 0.6] {
        let ir = IrrepParams::complementary_varpi(varpi).unwrap();
        let v = slow_vector(&ir, GridConfig::default());
        let scan = threshold_scan(&v, &ir, &r_grid).unwrap();
        let gamma = (1.0 - varpi) / 2.0;
        let (lo, hi) = (scan.last_solvable.unwrap(), scan.first_divergent.unwrap_or(f64::INFINITY));
        let brackets = lo < gamma + 1e-9 && gamma <= hi + 1e-9;
        let res = scan.resolution.unwrap_or(f64::INFINITY);
        ok &= brackets && res <= 0.02 + 1e-12 && scan.monotone;
        parts.push(format!("varpi={varpi}: [{lo:.2}, {hi:.2}] around {gamma}, monotone {}", scan.monotone));
    }
    report(4, ok, parts.join("; "));
}

#[test]
fn criterion_05_tauberian_identity() {
    let tau = TauProfile::Gaussian { sigma: 1.0 };
    let mut worst: f64 = 0.0;
    for r in [0.1, 0.2, 0.3, 0.4] {
        worst = worst.max(tauberian_check(&tau, r, &TauberianConfig::default()).unwrap().relative_error);
    }
    report(5, worst < 1e-4, format!("max relative error {worst:.2e}"));
}

#[test]
fn criterion_06_conjugation_scaling() {
    let ir = IrrepParams::complementary_varpi(0.5).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [0.3, 0.7] {
        for s in [0.5, 1.0, 2.0] {
            let mut dev = f64::INFINITY;
            let mut level = 0;
            while level <= 4 {
                let v = slow_vector(&ir, GridConfig::default().refined_times(level));
                dev = conjugation_scaling_check(&v, s, r, &ir).unwrap();
                if dev < 1e-6 {
                    break;
                }
                level += 1;
            }
            ok &= dev < 1e-6;
            parts.push(format!("(r={r}, s={s}): {dev:.1e} at level {level}"));
        }
    }
    report(6, ok, parts.join("; "));
}

fn two_factor(grid: GridConfig) -> TensorModel {
    let c = IrrepParams::complementary_varpi(0.5).unwrap();
    TensorModel::new(vec![DirectIntegralModel::single(c), DirectIntegralModel::single(c)], grid, 0.05).unwrap()
}

fn slow_pair(m: &TensorModel) -> TensorVector {
    let p = slow_profile(m.irrep(0, 0));
    TensorVector::from_profiles(m, &[0, 0], Complex64::new(1.0, 0.0), &[p.clone(), p]).unwrap()
}

#[test]
fn criterion_07_type_ii_two_factor() {
    let mut ratios = Vec::new();
    let mut solvable = true;
    let mut recon: f64 = 0.0;
    let base = GridConfig::default();
    for grid in [base, base.refined()] {
        let m = two_factor(grid);
        let xi = slow_pair(&m);
        let run = typeii_solve(&xi, &TypeIIProblem::new(vec![0.2, 0.2], &m).unwrap(), &m).unwrap();
        solvable &= run.branches.iter().flat_map(|b| b.reports.iter().flatten()).all(|r| r.verdict == Verdict::Solvable);
        recon = recon.max(run.reconstruction_error);
        ratios.push(typeii_estimate_check(&run, &xi, &m).unwrap().ratio);
    }
    let drift = (ratios[1] - ratios[0]).abs() / ratios[0];
    let w = sharpness_witness(&two_factor(base), &[0.3, 0.2], 0).unwrap();
    let ok = solvable && recon < 1e-12 && drift < 0.2 && w.all_divergent;
    report(
        7,
        ok,
        format!(
            "solvable {solvable}, reconstruction {recon:.1e}, estimate drift {drift:.2e}, witness divergent {}",
            w.all_divergent
        ),
    );
}

#[test]
fn criterion_08_order_two_bound_shape() {
    let c = IrrepParams::complementary_varpi(0.5).unwrap();
    let g = Profile::gaussian(1.0, 0.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for factors in [1usize, 2] {
        let axis = linspace(0.0, 4.0, 9);
        let a_grid = product_grid(&vec![axis; factors]);
        let mut maxes = Vec::new();
        for grid in [GridConfig::default(), GridConfig::default().refined()] {
            let m = TensorModel::new(vec![DirectIntegralModel::single(c); factors], grid, 0.05).unwrap();
            let v = TensorVector::from_profiles(&m, &vec![0; factors], Complex64::new(1.0, 0.0), &vec![g.clone(); factors])
                .unwrap();
            let chk = order2_bound_check(&v, &v, &m, &a_grid).unwrap();
            ok &= chk.rows.iter().all(|r| r.ratio.is_finite());
            maxes.push(chk.max_ratio);
        }
        let drift = (maxes[1] - maxes[0]).abs() / maxes[0];
        ok &= maxes[0].is_finite() && drift < 0.2;
        parts.push(format!("{factors} factor(s): max ratio {:.3e}, drift {drift:.1e}", maxes[0]));
    }
    report(8, ok, parts.join("; "));
}

/// Exhaustive search written independently of the library: every subset of positive roots,
/// pairwise strong orthogonality checked against the full root set.
fn brute_force_dominant(rs: &RootSystem) -> (Vec<i64>, Vec<HashSet<Root>>) {
    let all: HashSet<Root> = rs.roots.iter().cloned().collect();
    let pos = &rs.positive_roots;
    let so = |a: &Root, b: &Root| {
        let s: Root = a.iter().zip(b).map(|(x, y)| x + y).collect();
        let d: Root = a.iter().zip(b).map(|(x, y)| x - y).collect();
        !all.contains(&s) && !all.contains(&d)
    };
    let m = pos.len();
    let valid: Vec<u32> = (1u32..(1 << m))
        .filter(|&mask| {
            let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            idx.iter().all(|&i| idx.iter().all(|&j| i == j || so(&pos[i], &pos[j])))
        })
        .collect();
    let maximal: Vec<u32> = valid.iter().copied().filter(|&a| !valid.iter().any(|&b| b != a && b & a == a)).collect();
    let sum = |mask: u32| {
        let mut acc = vec![0i64; rs.simple_roots.len()];
        for i in (0..m).filter(|i| mask >> i & 1 == 1) {
            for (a, c) in acc.iter_mut().zip(rs.coefficients(&pos[i]).unwrap()) {
                *a += c;
            }
        }
        acc
    };
    let sums: Vec<Vec<i64>> = maximal.iter().map(|&x| sum(x)).collect();
    let dom: Vec<usize> =
        (0..maximal.len()).filter(|&i| sums.iter().all(|s| sums[i].iter().zip(s).all(|(a, b)| a >= b))).collect();
    let systems = dom.iter().map(|&i| (0..m).filter(|k| maximal[i] >> k & 1 == 1).map(|k| pos[k].clone()).collect()).collect();
    (dom.first().map(|&i| sums[i].clone()).unwrap_or_default(), systems)
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs())
}

#[test]
fn criterion_09_root_system_suite() {
    let mut ok = true;
    let mut parts = Vec::new();
    for (f, r) in [(Family::A, 1), (Family::A, 2), (Family::A, 3), (Family::B, 2), (Family::C, 2), (Family::D, 4)] {
        let rs = build_root_system(f, r).unwrap();
        let s = find_maximal_sos(&rs).unwrap();
        let (sum, systems) = brute_force_dominant(&rs);
        let got: HashSet<Root> = s.members.iter().cloned().collect();
        let hit = s.maximal && s.formal_sum_coeffs == sum && systems.contains(&got);
        ok &= hit;
        parts.push(format!("{f:?}{r} {}", if hit { "ok" } else { "MISMATCH" }));
    }

    // Hand-evaluated oracles.
    let b2 = build_root_system(Family::B, 2).unwrap();
    let s = find_maximal_sos(&b2).unwrap();
    let gaps = SpectralGapProfile::uniform(0.5, 2).unwrap();
    // a = (-1, 3) folds to (3, 1): θ(a⁺) = 2 and 4, η = e^{-0.4·2 - 0.4·4}.
    let eta = eta_epsilon(&s, &CartanElement::new(vec![-1.0, 3.0]), &gaps, 0.1, &b2).unwrap();
    let mut formulas = same(eta, (-2.4f64).exp());
    let a3 = build_root_system(Family::A, 3).unwrap();
    let s3 = find_maximal_sos(&a3).unwrap();
    let mixed = SpectralGapProfile::new(vec![0.3, 0.6], vec![FieldLabel::R, FieldLabel::C]).unwrap();
    let (zeta, p) = regularity_exponents(&s3, &mixed, 0.1).unwrap();
    formulas &= same(zeta, 2.4 + 1.1) && same(p, 0.2 + 0.5);
    formulas &= holder_gamma(1.0, 1.0).unwrap() == 0.25 && holder_gamma(3.0, 1.0).unwrap() == 0.5;
    formulas &= same(mixing_exponent(4, 2, (-6.0f64).exp()).unwrap(), (-1.0f64).exp());
    formulas &= same(mixing_exponent(2, 1, 0.3).unwrap(), 0.3);
    ok &= formulas;
    parts.push(format!("formula oracles {}", if formulas { "ok" } else { "MISMATCH" }));

    // ζ ≥ p on random valid profiles.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let systems: Vec<StronglyOrthogonalSystem> = [(Family::A, 1), (Family::C, 2), (Family::C, 3), (Family::C, 4)]
        .iter()
        .map(|&(f, r)| find_maximal_sos(&build_root_system(f, r).unwrap()).unwrap())
        .collect();
    let mut dominated = true;
    for _ in 0..1000 {
        let sys = &systems[rng.gen_range(0..systems.len())];
        let l = sys.len();
        let labels: Vec<FieldLabel> = (0..l).map(|_| if rng.gen_bool(0.5) { FieldLabel::C } else { FieldLabel::R }).collect();
        // Admissible ranges: (0, 1/2] for real roots (plus half-integers), (0, 1] for complex ones.
        let gammas: Vec<f64> = labels
            .iter()
            .map(|f| match f {
                FieldLabel::R if rng.gen_bool(0.1) => rng.gen_range(1..=4) as f64 / 2.0,
                FieldLabel::R => rng.gen_range(0.01..=0.5),
                FieldLabel::C => rng.gen_range(0.01..=1.0),
            })
            .collect();
        let eps = rng.gen_range(0.0..1.0) * gammas.iter().cloned().fold(f64::INFINITY, f64::min);
        if eps == 0.0 {
            continue;
        }
        let profile = SpectralGapProfile::new(gammas, labels).unwrap();
        let (z, p) = regularity_exponents(sys, &profile, eps).unwrap();
        dominated &= z >= p;
    }
    ok &= dominated;
    parts.push(format!("zeta >= p {}", if dominated { "ok" } else { "VIOLATED" }));
    report(9, ok, parts.join(", "));
}

#[test]
fn criterion_10_partition_scheduler() {
    let t = Instant::now();
    let rows = partition_sweep(1000, 2024, (3, 8), &[1, 2, 3], 0.01);
    let dt = t.elapsed();
    let bad: Vec<_> = rows.iter().filter(|r| !r.ok).collect();
    let pivots = rows.iter().all(|r| matches!((r.pivot_gap, r.min_pivot), (Some(g), Some(m)) if g >= m * (1.0 - 1e-12) && m > 0.0));
    report(
        10,
        bad.is_empty() && pivots && rows.len() == 1000 && dt < Duration::from_secs(5),
        format!("{} / 1000 plans verified, pivot bound {pivots}, {:.2}s", 1000 - bad.len(), dt.as_secs_f64()),
    );
}

#[test]
fn criterion_11_property_suites() {
    let rep = run_selftest(GridConfig::default(), &[]).unwrap();
    let names: Vec<String> =
        rep.suites.iter().map(|s| format!("{} {}", s.name, if s.pass { "ok" } else { "FAIL" })).collect();
    report(11, rep.pass && rep.seconds < 60.0, format!("{} in {:.2}s", names.join(", "), rep.seconds));
}
