//! Invariant suites run by the `selftest` subcommand.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fracsolve::{cutoff_apply, frac_apply, highpass_frac_solve, CutoffProfile};
use crate::sl2model::{
    flow_apply, make_grid, make_irrep, matrix_coefficient, slow_profile, Flow, GridConfig, IrrepParams, ModelVector,
    Series,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
    /// Wall time; not serialized so reports stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub pass: bool,
    pub suites: Vec<SuiteResult>,
    #[serde(skip)]
    pub seconds: f64,
}

pub const SUITES: [&str; 5] = ["flow-unitarity", "group-laws", "frac-semigroup", "cutoff-complementarity", "grid-refinement"];

struct Checks(Vec<CheckResult>);

impl Checks {
    fn below(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.0.push(CheckResult { name: name.into(), pass: value <= tolerance, value, tolerance });
    }
}

fn test_irreps() -> Result<Vec<(String, IrrepParams)>> {
    Ok(vec![
        ("principal mu=2".into(), make_irrep(Series::Principal, 2.0)?),
        ("complementary varpi=0.5".into(), make_irrep(Series::Complementary, 0.75)?),
        ("discrete n=2".into(), make_irrep(Series::Discrete, 2.0)?),
    ])
}

fn vector(grid: GridConfig, ir: &IrrepParams) -> Result<ModelVector> {
    Ok(ModelVector::from_profile(make_grid(grid, ir)?, slow_profile(ir)))
}

fn rel(a: &ModelVector, b: &ModelVector) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(f64::MIN_POSITIVE)
}

fn flow(f: &ModelVector, fl: Flow, ir: &IrrepParams) -> Result<ModelVector> {
    Ok(flow_apply(f, fl, ir)?.vector)
}

fn flow_unitarity(grid: GridConfig, c: &mut Checks) -> Result<()> {
    for (label, ir) in test_irreps()? {
        let f = vector(grid, &ir)?;
        let n0 = f.norm_sq();
        for s in [-1.0, 0.5, 1.5] {
            let g = flow(&f, Flow::Geodesic(s), &ir)?;
            c.below(format!("{label}: geodesic s={s}"), (g.norm_sq() / n0 - 1.0).abs(), 1e-6);
        }
        for t in [1.0, 5.0] {
            let g = flow(&f, Flow::Horocycle(t), &ir)?;
            c.below(format!("{label}: horocycle t={t}"), (g.norm_sq() / n0 - 1.0).abs(), 1e-12);
        }
    }
    Ok(())
}

fn group_laws(grid: GridConfig, c: &mut Checks) -> Result<()> {
    for (label, ir) in test_irreps()? {
        let f = vector(grid, &ir)?;
        let (s1, s2) = (0.4, -0.9);
        let lhs = flow(&flow(&f, Flow::Geodesic(s2), &ir)?, Flow::Geodesic(s1), &ir)?;
        let rhs = flow(&f, Flow::Geodesic(s1 + s2), &ir)?;
        c.below(format!("{label}: a(s1)a(s2) = a(s1+s2)"), rel(&lhs, &rhs), 1e-12);
        let lhs = flow(&flow(&f, Flow::Horocycle(2.0), &ir)?, Flow::Horocycle(-0.5), &ir)?;
        let rhs = flow(&f, Flow::Horocycle(1.5), &ir)?;
        c.below(format!("{label}: h(t1)h(t2) = h(t1+t2)"), rel(&lhs, &rhs), 1e-12);
        // a(s) h(t) a(-s) = h(e^{-2s} t), with s a whole number of grid steps so that
        // the profile-free flow lands on nodes.
        let s = 5.0 * f.grid.h / 2.0;
        let t = 3.0;
        let lhs = flow(&flow(&flow(&f, Flow::Geodesic(-s), &ir)?, Flow::Horocycle(t), &ir)?, Flow::Geodesic(s), &ir)?;
        let rhs = flow(&f, Flow::Horocycle((-2.0 * s).exp() * t), &ir)?;
        // The innermost grid steps have no preimage on the grid.
        let cut = f.grid.config.lambda_min * (2.0 * s).exp() * (1.0 + 1e-9);
        let mask = |v: &ModelVector| v.multiply(|l| if l.abs() >= cut { 1.0 } else { 0.0 });
        c.below(format!("{label}: a(s)h(t)a(-s) = h(e^(-2s)t)"), rel(&mask(&lhs), &mask(&rhs)), 1e-9);
    }
    Ok(())
}

fn frac_semigroup(grid: GridConfig, c: &mut Checks) -> Result<()> {
    for (label, ir) in test_irreps()? {
        let f = vector(grid, &ir)?;
        for (r1, r2) in [(0.3, 0.45), (0.1, 1.2)] {
            let lhs = frac_apply(&frac_apply(&f, r2)?, r1)?;
            let rhs = frac_apply(&f, r1 + r2)?;
            c.below(format!("{label}: |U|^{r1}|U|^{r2} = |U|^{}", r1 + r2), rel(&lhs, &rhs), 1e-12);
        }
        c.below(format!("{label}: |U|^0 = 1"), rel(&frac_apply(&f, 0.0)?, &f), 0.0);
    }
    Ok(())
}

fn cutoff_complementarity(grid: GridConfig, c: &mut Checks) -> Result<()> {
    for (label, ir) in test_irreps()? {
        let f = vector(grid, &ir)?;
        for scale in [0.1, 1.0] {
            let p = CutoffProfile { scale };
            let low = cutoff_apply(&f, &p);
            let q = 0.6;
            let high = frac_apply(highpass_frac_solve(&f, q, &p)?.solution.as_ref().unwrap(), q)?;
            let sum = ModelVector::with_values(&f, low.values.iter().zip(&high.values).map(|(a, b)| a + b).collect());
            c.below(format!("{label}, scale {scale}: P + (1-P) = 1"), rel(&sum, &f), 1e-12);
            let leak_low = f
                .grid
                .nodes
                .iter()
                .zip(&low.values)
                .filter(|(l, _)| l.abs() >= 2.0 * scale)
                .map(|(_, v)| v.norm())
                .fold(0.0, f64::max);
            let leak_high = f
                .grid
                .nodes
                .iter()
                .zip(&high.values)
                .filter(|(l, _)| l.abs() <= scale)
                .map(|(_, v)| v.norm())
                .fold(0.0, f64::max);
            c.below(format!("{label}, scale {scale}: supports"), leak_low.max(leak_high), 0.0);
            c.below(format!("{label}, scale {scale}: ||Pf|| <= ||f||"), (low.norm() - f.norm()).max(0.0), 0.0);
        }
    }
    Ok(())
}

fn grid_refinement(grid: GridConfig, c: &mut Checks) -> Result<()> {
    for (label, ir) in test_irreps()? {
        let mut norms = Vec::new();
        let mut coeffs: Vec<Complex64> = Vec::new();
        for level in 0..3 {
            let f = vector(grid.refined_times(level), &ir)?;
            norms.push(f.norm_sq());
            coeffs.push(matrix_coefficient(&f, &f, Flow::Horocycle(5.0), &ir)?);
        }
        let scale = norms[2].abs();
        let d = [(norms[1] - norms[0]).abs(), (norms[2] - norms[1]).abs()];
        let e = [(coeffs[1] - coeffs[0]).norm(), (coeffs[2] - coeffs[1]).norm()];
        for (what, steps) in [("norm", d), ("horocycle coefficient", e)] {
            c.below(format!("{label}: {what} Cauchy step"), steps[1] / scale, 1e-5);
            // Steps at rounding level count as converged.
            let ratio = if steps[1] <= 1e-13 * scale { 0.0 } else { steps[1] / steps[0] };
            c.below(format!("{label}: {what} contraction"), ratio, 0.75);
        }
    }
    Ok(())
}

/// Runs the named suites (all when `only` is empty) on grids derived from `grid`.
pub fn run_selftest(grid: GridConfig, only: &[String]) -> Result<SelfTestReport> {
    let start = Instant::now();
    let mut suites = Vec::new();
    for name in SUITES {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let t = Instant::now();
        let mut c = Checks(Vec::new());
        match name {
            "flow-unitarity" => flow_unitarity(grid, &mut c)?,
            "group-laws" => group_laws(grid, &mut c)?,
            "frac-semigroup" => frac_semigroup(grid, &mut c)?,
            "cutoff-complementarity" => cutoff_complementarity(grid, &mut c)?,
            _ => grid_refinement(grid, &mut c)?,
        }
        suites.push(SuiteResult {
            name: name.into(),
            pass: c.0.iter().all(|k| k.pass),
            checks: c.0,
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    Ok(SelfTestReport {
        pass: suites.iter().all(|s| s.pass),
        suites,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suites_pass() {
        let rep = run_selftest(GridConfig::default(), &[]).unwrap();
        for s in &rep.suites {
            for k in &s.checks {
                assert!(k.pass, "{} / {}: {:e} > {:e}", s.name, k.name, k.value, k.tolerance);
            }
        }
        assert_eq!(rep.suites.len(), SUITES.len());
        assert!(rep.pass);
    }

    #[test]
    fn suite_filter() {
        let rep = run_selftest(GridConfig::default(), &["frac-semigroup".to_string()]).unwrap();
        assert_eq!(rep.suites.len(), 1);
    }
}
