//! Finite direct integrals, tensor products of commuting SL(2) factors and the
//! multi-factor fractional solver.
//!
//! Tensor vectors are sums of rank-one terms, one model vector per factor, so norms
//! factor into per-axis inner products and per-factor divisions commute exactly.
//! Complex factors reuse the real model in the |λ| variable: their two branches
//! split ξ with the multipliers (1-f)+f² and f-f² built from the cutoff f.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fracsolve::{frac_apply, frac_solve, CutoffProfile, SolveReport, Verdict};
use crate::rootsys::{zeta_single, FieldLabel};
use crate::sl2model::{apply_sigma, slow_profile, GridConfig, IrrepParams, ModelVector, Profile, SpectralGrid};

/// Factors evaluated on dense product grids; larger products are sampled.
pub const MAX_DENSE_FACTORS: usize = 2;

const SAMPLE_TUPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectIntegralModel {
    pub components: Vec<(IrrepParams, f64)>,
    pub field: FieldLabel,
}

impl DirectIntegralModel {
    pub fn new(components: Vec<(IrrepParams, f64)>, field: FieldLabel) -> Result<Self> {
        if components.is_empty() {
            return domain("a direct integral needs at least one component");
        }
        if components.iter().any(|(_, w)| !(*w > 0.0 && w.is_finite())) {
            return domain("component weights must be positive");
        }
        Ok(Self { components, field })
    }

    pub fn single(irrep: IrrepParams) -> Self {
        Self { components: vec![(irrep, 1.0)], field: FieldLabel::R }
    }

    pub fn with_field(mut self, field: FieldLabel) -> Self {
        self.field = field;
        self
    }

    /// Index of a component attaining the spectral gap (first on ties).
    pub fn gap_component(&self) -> usize {
        let mut best = 0;
        for (i, (ir, _)) in self.components.iter().enumerate() {
            if ir.optimal_rate() < self.components[best].0.optimal_rate() {
                best = i;
            }
        }
        best
    }
}

/// min over components of (1-ν₀)/2 (n/2 on the discrete series).
pub fn spectral_gap(model: &DirectIntegralModel) -> f64 {
    model.components.iter().map(|(ir, _)| ir.optimal_rate()).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub gamma: f64,
    pub zeta: f64,
}

#[derive(Debug, Clone)]
pub struct TensorModel {
    pub factors: Vec<DirectIntegralModel>,
    pub grid_config: GridConfig,
    pub eps: f64,
    pub gaps: Vec<GapEntry>,
    /// grids[i][c]: grid of component c of factor i.
    pub grids: Vec<Vec<Arc<SpectralGrid>>>,
}

impl TensorModel {
    pub fn new(factors: Vec<DirectIntegralModel>, grid_config: GridConfig, eps: f64) -> Result<Self> {
        if factors.is_empty() {
            return domain("a tensor model needs at least one factor");
        }
        if !(eps > 0.0) {
            return domain("epsilon must be positive");
        }
        let gaps = factors
            .iter()
            .map(|f| {
                let gamma = spectral_gap(f);
                GapEntry { gamma, zeta: zeta_single(gamma, f.field, eps) }
            })
            .collect();
        let grids = factors
            .iter()
            .map(|f| {
                f.components
                    .iter()
                    .map(|(ir, _)| SpectralGrid::new(grid_config, ir).map(Arc::new))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { factors, grid_config, eps, gaps, grids })
    }

    pub fn refined(&self) -> Result<Self> {
        Self::new(self.factors.clone(), self.grid_config.refined(), self.eps)
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn irrep(&self, factor: usize, component: usize) -> &IrrepParams {
        &self.factors[factor].components[component].0
    }

    fn weight(&self, components: &[usize]) -> f64 {
        components.iter().enumerate().map(|(i, &c)| self.factors[i].components[c].1).product()
    }
}

#[derive(Debug, Clone)]
pub struct TensorTerm {
    pub components: Vec<usize>,
    pub coeff: Complex64,
    pub factors: Vec<ModelVector>,
}

#[derive(Debug, Clone, Default)]
pub struct TensorVector {
    pub terms: Vec<TensorTerm>,
}

impl TensorVector {
    /// coeff·⊗ profiles on the given component of each factor.
    pub fn from_profiles(model: &TensorModel, components: &[usize], coeff: Complex64, profiles: &[Profile]) -> Result<Self> {
        if components.len() != model.len() || profiles.len() != model.len() {
            return domain("one component and one profile per factor");
        }
        let factors = profiles
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let grid = model.grids[i]
                    .get(components[i])
                    .ok_or_else(|| Error::Domain(format!("factor {} has no component {}", i + 1, components[i])))?;
                Ok(ModelVector::from_profile(grid.clone(), p.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { terms: vec![TensorTerm { components: components.to_vec(), coeff, factors }] })
    }

    pub fn add(mut self, other: TensorVector) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| TensorTerm { coeff: t.coeff * c, ..t.clone() })
                .collect(),
        }
    }

    pub fn norm_sq(&self, model: &TensorModel) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &self.terms {
                if a.components != b.components {
                    continue;
                }
                let mut ip = a.coeff * b.coeff.conj() * model.weight(&a.components);
                for (u, v) in a.factors.iter().zip(&b.factors) {
                    ip *= u.inner(v);
                }
                acc += ip;
            }
        }
        acc.re.max(0.0)
    }

    pub fn norm(&self, model: &TensorModel) -> f64 {
        self.norm_sq(model).sqrt()
    }

    fn component_tuples(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for t in &self.terms {
            if !out.contains(&t.components) {
                out.push(t.components.clone());
            }
        }
        out
    }

    /// Value at one node tuple of the given component tuple.
    fn value_at(&self, components: &[usize], idx: &[usize]) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.components == components)
            .map(|t| t.factors.iter().zip(idx).fold(t.coeff, |acc, (v, &k)| acc * v.values[k]))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lambda {
    U,
    IU,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeIIProblem {
    pub exponents: Vec<f64>,
    /// One tuple of (Λ_i) per branch.
    pub branches: Vec<Vec<Lambda>>,
    /// All factors real, so every choice collapses to a single branch.
    pub collapsed: bool,
}

impl TypeIIProblem {
    pub fn new(exponents: Vec<f64>, model: &TensorModel) -> Result<Self> {
        if exponents.len() != model.len() {
            return domain("one exponent per factor");
        }
        if exponents.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return domain("exponents must be nonnegative");
        }
        let mut branches: Vec<Vec<Lambda>> = vec![vec![]];
        for f in &model.factors {
            let choices: &[Lambda] = match f.field {
                FieldLabel::R => &[Lambda::U],
                FieldLabel::C => &[Lambda::U, Lambda::IU],
            };
            branches = branches
                .into_iter()
                .flat_map(|b| {
                    choices.iter().map(move |&c| {
                        let mut nb = b.clone();
                        nb.push(c);
                        nb
                    })
                })
                .collect();
        }
        let collapsed = model.factors.iter().all(|f| f.field == FieldLabel::R);
        Ok(Self { exponents, branches, collapsed })
    }
}

fn branch_multiplier(field: FieldLabel, choice: Lambda, cutoff: &CutoffProfile, l: f64) -> f64 {
    let f = cutoff.eval(l);
    match (field, choice) {
        (FieldLabel::R, _) => 1.0,
        (FieldLabel::C, Lambda::U) => (1.0 - f) + f * f,
        (FieldLabel::C, Lambda::IU) => f - f * f,
    }
}

#[derive(Debug, Clone)]
pub struct BranchResult {
    pub branch: Vec<Lambda>,
    pub xi: TensorVector,
    pub omega: TensorVector,
    pub omega_norm: f64,
    /// reports[term][factor].
    pub reports: Vec<Vec<SolveReport>>,
}

#[derive(Debug, Clone)]
pub struct TypeIIRun {
    pub branches: Vec<BranchResult>,
    /// Max nodewise |Σ_λ Π|Λ|^r ω_λ - ξ| relative to max |ξ|.
    pub reconstruction_error: f64,
    /// Set when complex factors were split; describes the branch mapping used.
    pub mapping_note: Option<String>,
}

pub fn typeii_solve(xi: &TensorVector, problem: &TypeIIProblem, model: &TensorModel) -> Result<TypeIIRun> {
    for (i, (&r, gap)) in problem.exponents.iter().zip(&model.gaps).enumerate() {
        if r >= gap.gamma {
            return Err(Error::Precondition {
                factor: i + 1,
                message: format!("exponent {r} is not below the spectral gap {}", gap.gamma),
            });
        }
    }
    let cutoff = CutoffProfile::default();
    let branches = problem
        .branches
        .par_iter()
        .map(|branch| solve_branch(xi, branch, problem, model, &cutoff))
        .collect::<Result<Vec<_>>>()?;
    let reconstruction_error = reconstruction_error(xi, &branches, &problem.exponents)?;
    let mapping_note = (!problem.collapsed).then(|| {
        "complex factors: U-branch carries (1-f)+f^2, iU-branch carries f-f^2; the mixed term is routed to the U-branch"
            .to_string()
    });
    Ok(TypeIIRun { branches, reconstruction_error, mapping_note })
}

fn solve_branch(
    xi: &TensorVector,
    branch: &[Lambda],
    problem: &TypeIIProblem,
    model: &TensorModel,
    cutoff: &CutoffProfile,
) -> Result<BranchResult> {
    let mut xi_b = TensorVector::default();
    let mut omega = TensorVector::default();
    let mut reports = Vec::new();
    for term in &xi.terms {
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        let mut reps = Vec::new();
        for (i, v) in term.factors.iter().enumerate() {
            let field = model.factors[i].field;
            let part = if field == FieldLabel::R {
                v.clone()
            } else {
                v.multiply(|l| branch_multiplier(field, branch[i], cutoff, l))
            };
            let r = problem.exponents[i];
            let ir = model.irrep(i, term.components[i]);
            let rep = if r == 0.0 {
                identity_report(&part)
            } else {
                frac_solve(&part, r, ir)?
            };
            if rep.verdict != Verdict::Solvable {
                return Err(Error::Divergent { factor: i + 1, report: Box::new(rep) });
            }
            ws.push(rep.solution.clone().expect("solvable reports carry a solution"));
            xs.push(part);
            reps.push(rep);
        }
        xi_b.terms.push(TensorTerm { components: term.components.clone(), coeff: term.coeff, factors: xs });
        omega.terms.push(TensorTerm { components: term.components.clone(), coeff: term.coeff, factors: ws });
        reports.push(reps);
    }
    let omega_norm = omega.norm(model);
    Ok(BranchResult { branch: branch.to_vec(), xi: xi_b, omega, omega_norm, reports })
}

fn identity_report(v: &ModelVector) -> SolveReport {
    SolveReport {
        solution: Some(v.clone()),
        solution_norm: Some(v.norm()),
        verdict: Verdict::Solvable,
        tail_slope: f64::INFINITY,
        divergence_exponent: 0.0,
        partial_norms: vec![],
    }
}

/// Node tuples used for the reconstruction check: all of them for small products,
/// a deterministic stride sample otherwise.
fn node_tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().product();
    let dense = sizes.len() <= MAX_DENSE_FACTORS;
    let count = if dense { total } else { total.min(SAMPLE_TUPLES) };
    let stride = if dense { 1 } else { (total / count).max(1) };
    (0..count)
        .map(|j| {
            let mut rem = j * stride + (stride / 2) * usize::from(!dense);
            sizes
                .iter()
                .map(|&s| {
                    let k = rem % s;
                    rem /= s;
                    k
                })
                .collect()
        })
        .collect()
}

fn reconstruction_error(xi: &TensorVector, branches: &[BranchResult], exponents: &[f64]) -> Result<f64> {
    let mut back_terms = TensorVector::default();
    for b in branches {
        for t in &b.omega.terms {
            let factors = t
                .factors
                .iter()
                .zip(exponents)
                .map(|(w, &r)| frac_apply(w, r))
                .collect::<Result<Vec<_>>>()?;
            back_terms.terms.push(TensorTerm { components: t.components.clone(), coeff: t.coeff, factors });
        }
    }
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for comps in xi.component_tuples() {
        let first = xi.terms.iter().find(|t| t.components == comps).unwrap();
        let sizes: Vec<usize> = first.factors.iter().map(|v| v.values.len()).collect();
        let tuples = node_tuples(&sizes);
        let (e, s) = tuples
            .par_iter()
            .map(|idx| {
                let want = xi.value_at(&comps, idx);
                let got = back_terms.value_at(&comps, idx);
                ((got - want).norm(), want.norm())
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        err = err.max(e);
        scale = scale.max(s);
    }
    Ok(if scale > 0.0 { err / scale } else { err })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateCheck {
    /// Power of Σ_i = I - X_i² - V_i² applied on each factor.
    pub sigma_powers: Vec<usize>,
    pub sigma_norm: f64,
    pub max_omega_norm: f64,
    pub ratio: f64,
}

/// ‖Σ_n^{k_n}⋯Σ_1^{k_1} ξ‖ with k_i = ⌈ζ_i/2⌉.
pub fn sigma_budget(xi: &TensorVector, model: &TensorModel) -> Result<(Vec<usize>, f64)> {
    let powers: Vec<usize> = model.gaps.iter().map(|g| (g.zeta / 2.0).ceil() as usize).collect();
    let mut out = TensorVector::default();
    for t in &xi.terms {
        let factors = t
            .factors
            .iter()
            .enumerate()
            .map(|(i, v)| apply_sigma(v, powers[i], model.irrep(i, t.components[i])))
            .collect::<Result<Vec<_>>>()?;
        out.terms.push(TensorTerm { components: t.components.clone(), coeff: t.coeff, factors });
    }
    Ok((powers, out.norm(model)))
}

pub fn typeii_estimate_check(run: &TypeIIRun, xi: &TensorVector, model: &TensorModel) -> Result<EstimateCheck> {
    let (sigma_powers, sigma_norm) = sigma_budget(xi, model)?;
    let max_omega_norm = run.branches.iter().map(|b| b.omega_norm).fold(0.0, f64::max);
    if sigma_norm == 0.0 {
        return domain("the regularity budget of ξ vanishes");
    }
    Ok(EstimateCheck { sigma_powers, sigma_norm, max_omega_norm, ratio: max_omega_norm / sigma_norm })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessBranch {
    pub branch: Vec<Lambda>,
    pub verdict: Verdict,
    pub divergence_exponent: f64,
    pub divergent_factors: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    pub factor: usize,
    pub component: usize,
    pub exponent: f64,
    pub gamma: f64,
    pub branches: Vec<WitnessBranch>,
    pub all_divergent: bool,
}

/// Builds ξ = ⊗ v_j with the slowest profile in factor `factor` (0-based) and
/// cutoff-smoothed bumps elsewhere, then tries to solve Π|Λ_i|^{r_i} ω = ξ on every branch.
pub fn sharpness_witness(model: &TensorModel, exponents: &[f64], factor: usize) -> Result<WitnessReport> {
    if factor >= model.len() || exponents.len() != model.len() {
        return Err(Error::Construction("factor index or exponent count out of range".into()));
    }
    let gamma = model.gaps[factor].gamma;
    let r = exponents[factor];
    if r <= gamma {
        return Err(Error::Construction(format!(
            "exponent {r} does not exceed the gap {gamma}; not a witness regime"
        )));
    }
    let problem = TypeIIProblem::new(exponents.to_vec(), model)?;
    let cutoff = CutoffProfile::default();
    let components: Vec<usize> = model.factors.iter().map(|f| f.gap_component()).collect();
    let vectors: Vec<ModelVector> = (0..model.len())
        .map(|j| {
            let grid = model.grids[j][components[j]].clone();
            let ir = model.irrep(j, components[j]);
            let v = ModelVector::from_profile(grid, slow_profile(ir));
            if j == factor {
                v
            } else {
                v.multiply(|l| cutoff.eval(l))
            }
        })
        .collect();
    let branches = problem
        .branches
        .iter()
        .map(|branch| {
            let mut divergent = Vec::new();
            let mut exponent: f64 = 0.0;
            for (j, v) in vectors.iter().enumerate() {
                if exponents[j] == 0.0 {
                    continue;
                }
                let rep = frac_solve(v, exponents[j], model.irrep(j, components[j]))?;
                if rep.verdict != Verdict::Solvable {
                    divergent.push(j + 1);
                    exponent = exponent.max(rep.divergence_exponent);
                }
            }
            Ok(WitnessBranch {
                branch: branch.clone(),
                verdict: if divergent.is_empty() { Verdict::Solvable } else { Verdict::Divergent },
                divergence_exponent: exponent,
                divergent_factors: divergent,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_divergent = branches.iter().all(|b| b.verdict == Verdict::Divergent);
    Ok(WitnessReport { factor: factor + 1, component: components[factor], exponent: r, gamma, branches, all_divergent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn comp(v: f64) -> IrrepParams {
        IrrepParams::complementary_varpi(v).unwrap()
    }

    fn two_factor() -> TensorModel {
        TensorModel::new(
            vec![DirectIntegralModel::single(comp(0.5)), DirectIntegralModel::single(comp(0.5))],
            GridConfig { ratio: 1.1, ..Default::default() },
            0.05,
        )
        .unwrap()
    }

    fn gauss_pair(model: &TensorModel) -> TensorVector {
        let g = Profile::gaussian(1.0, 0.0);
        TensorVector::from_profiles(model, &[0, 0], Complex64::new(1.0, 0.0), &[g.clone(), g]).unwrap()
    }

    #[test]
    fn gap_examples() {
        assert_relative_eq!(spectral_gap(&DirectIntegralModel::single(comp(0.5))), 0.25);
        let mix = DirectIntegralModel::new(
            vec![(comp(0.5), 1.0), (IrrepParams::principal(2.0).unwrap(), 2.0)],
            FieldLabel::R,
        )
        .unwrap();
        assert_relative_eq!(spectral_gap(&mix), 0.25);
        assert_eq!(spectral_gap(&DirectIntegralModel::single(IrrepParams::discrete(2).unwrap())), 1.0);
        assert!(DirectIntegralModel::new(vec![], FieldLabel::R).is_err());
        assert!(DirectIntegralModel::new(vec![(comp(0.5), 0.0)], FieldLabel::R).is_err());
    }

    #[test]
    fn registry() {
        let m = two_factor();
        assert_relative_eq!(m.gaps[0].zeta, 0.25 + 2.05);
        assert!(m.gaps.iter().all(|g| g.zeta >= g.gamma));
    }

    #[test]
    fn one_factor_reduces_to_frac_solve() {
        let m = TensorModel::new(vec![DirectIntegralModel::single(comp(0.5))], GridConfig::default(), 0.05).unwrap();
        let xi = TensorVector::from_profiles(&m, &[0], Complex64::new(1.0, 0.0), &[Profile::gaussian(1.0, 0.0)]).unwrap();
        let p = TypeIIProblem::new(vec![0.2], &m).unwrap();
        assert_eq!(p.branches.len(), 1);
        let run = typeii_solve(&xi, &p, &m).unwrap();
        let direct = frac_solve(&xi.terms[0].factors[0], 0.2, m.irrep(0, 0)).unwrap();
        assert_relative_eq!(run.branches[0].omega_norm, direct.solution_norm.unwrap(), max_relative = 1e-12);
        assert!(run.reconstruction_error < 1e-14);
    }

    #[test]
    fn two_factor_solve_and_precondition() {
        let m = two_factor();
        let xi = gauss_pair(&m);
        let run = typeii_solve(&xi, &TypeIIProblem::new(vec![0.2, 0.2], &m).unwrap(), &m).unwrap();
        assert!(run.reconstruction_error < 1e-14);
        assert!(run.branches[0].omega_norm.is_finite());
        assert!(run.mapping_note.is_none());
        let err = typeii_solve(&xi, &TypeIIProblem::new(vec![0.3, 0.2], &m).unwrap(), &m).unwrap_err();
        assert!(matches!(err, Error::Precondition { factor: 1, .. }));
    }

    #[test]
    fn complex_factor_branches() {
        let m = TensorModel::new(
            vec![
                DirectIntegralModel::single(comp(0.5)),
                DirectIntegralModel::single(comp(0.4)).with_field(FieldLabel::C),
            ],
            GridConfig { ratio: 1.1, ..Default::default() },
            0.05,
        )
        .unwrap();
        assert_relative_eq!(m.gaps[1].zeta, 1.05);
        let p = TypeIIProblem::new(vec![0.2, 0.25], &m).unwrap();
        assert_eq!(p.branches.len(), 2);
        let xi = gauss_pair(&m);
        let run = typeii_solve(&xi, &p, &m).unwrap();
        assert!(run.reconstruction_error < 1e-14);
        assert!(run.mapping_note.is_some());
    }

    #[test]
    fn estimate_ratio_is_homogeneous() {
        let m = two_factor();
        let p = TypeIIProblem::new(vec![0.2, 0.2], &m).unwrap();
        let xi = gauss_pair(&m);
        let a = typeii_estimate_check(&typeii_solve(&xi, &p, &m).unwrap(), &xi, &m).unwrap();
        let xs = xi.scale(Complex64::new(0.0, 3.0));
        let b = typeii_estimate_check(&typeii_solve(&xs, &p, &m).unwrap(), &xs, &m).unwrap();
        assert_eq!(a.sigma_powers, vec![2, 2]);
        assert_relative_eq!(a.ratio, b.ratio, max_relative = 1e-12);
    }

    #[test]
    fn witness() {
        let m = two_factor();
        let w = sharpness_witness(&m, &[0.3, 0.2], 0).unwrap();
        assert!(w.all_divergent);
        assert!(w.branches.iter().all(|b| b.divergence_exponent > 0.0));
        assert!(matches!(sharpness_witness(&m, &[0.2, 0.2], 0), Err(Error::Construction(_))));
    }

    #[test]
    fn sampled_tuples_cover_large_products() {
        let t = node_tuples(&[100, 100, 100]);
        assert_eq!(t.len(), SAMPLE_TUPLES);
        assert!(t.iter().all(|i| i.iter().all(|&k| k < 100)));
        assert_eq!(node_tuples(&[3, 4]).len(), 12);
    }
}
