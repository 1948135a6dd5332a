//! Two-block partition scheduler for n-point correlations and the resulting bounds.
//!
//! Points are split Cartan coordinates t_i. For a root β, β(𝔞^t) = exp⟨β, t⟩ and all
//! comparisons are made on the exponents. Slots are 1-based as in the construction:
//! slot k+1 is the reference point and L_i = ⟨β, t_{k+1} - t_i⟩.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rootsys::{
    build_root_system, dot_f, eta_epsilon, find_maximal_sos, weyl_fold, weyl_pullback, CartanElement, Family, Root,
    RootSystem, SpectralGapProfile, StronglyOrthogonalSystem,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapConfiguration {
    pub root_system: RootSystem,
    pub sos: StronglyOrthogonalSystem,
    pub gaps: SpectralGapProfile,
    pub points: Vec<CartanElement>,
    /// Exponent d of the polynomial penalty (‖τ‖+1)^d for non-split inputs.
    pub penalty: Option<f64>,
}

impl GapConfiguration {
    pub fn new(
        root_system: RootSystem,
        sos: StronglyOrthogonalSystem,
        gaps: SpectralGapProfile,
        points: Vec<CartanElement>,
        penalty: Option<f64>,
    ) -> Result<Self> {
        if sos.members.len() != gaps.gammas.len() {
            return domain("one gap per strongly orthogonal root");
        }
        if sos.is_empty() {
            return domain("strongly orthogonal system must be nonempty");
        }
        if points.iter().any(|p| p.log_coords.len() != root_system.dim) {
            return domain(format!("points must have {} coordinates", root_system.dim));
        }
        if let Some(d) = penalty {
            if !(d >= 0.0) {
                return domain("penalty exponent must be nonnegative");
            }
        }
        Ok(Self { root_system, sos, gaps, points, penalty })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// log β(𝔞^{t_i - t_j}).
    pub fn log_root_value(&self, beta: &[i64], i: usize, j: usize) -> f64 {
        dot_f(beta, &self.points[i].log_coords) - dot_f(beta, &self.points[j].log_coords)
    }

    fn diff(&self, i: usize, j: usize) -> CartanElement {
        self.points[i].compose(&self.points[j].inverse())
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.diff(i, j).log_coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn subset(&self, idx: &[usize]) -> Self {
        Self { points: idx.iter().map(|&i| self.points[i].clone()).collect(), ..self.clone() }
    }
}

/// Pair (i, j), i < j, of maximal Euclidean distance; the lexicographically first on ties.
pub fn max_gap_pair(config: &GapConfiguration) -> Result<(usize, usize)> {
    let n = config.n();
    if n < 2 {
        return domain("need at least two points");
    }
    let mut best = (0, 1);
    let mut d = config.distance(0, 1);
    for i in 0..n {
        for j in (i + 1)..n {
            let e = config.distance(i, j);
            if e > d {
                d = e;
                best = (i, j);
            }
        }
    }
    Ok(best)
}

/// Slot order (slot → point) with the max-gap pair in slots 1 and k+1.
pub fn order_for_partition(config: &GapConfiguration) -> Result<Vec<usize>> {
    let (i, j) = max_gap_pair(config)?;
    let mut order = vec![i];
    order.extend((0..config.n()).filter(|&p| p != i && p != j));
    order.push(j);
    Ok(order)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootChoice {
    /// 1-based index into the strongly orthogonal system.
    pub index: usize,
    pub theta: Root,
    /// β = w⁻¹θ with w folding t_{k+1} - t_1 into the positive chamber.
    pub beta: Root,
    /// Sign s with ⟨β, s(t_{k+1} - t_1)⟩ > 0; always +1 for this choice of β.
    pub orientation: i8,
    /// log η_{ε/2}(S, ·)^{1/l} and the chosen root's log factor.
    pub log_eta_share: f64,
    pub log_factor: f64,
}

/// Smallest i whose factor in η_{ε/2} is at least as strong as the geometric mean.
pub fn choose_root_index(config: &GapConfiguration, order: &[usize], eps: f64) -> Result<RootChoice> {
    let gmin = config.gaps.min_gamma();
    if !(eps > 0.0 && eps < gmin) {
        return domain(format!("epsilon {eps} must lie in (0, min gamma)"));
    }
    if order.len() < 2 {
        return domain("need at least two slots");
    }
    let first = order[0];
    let reference = *order.last().unwrap();
    let x = config.diff(reference, first);
    let (plus, refl) = weyl_fold(&x.log_coords, &config.root_system);
    let terms: Vec<(f64, f64)> = config
        .sos
        .members
        .iter()
        .zip(&config.gaps.gammas)
        .map(|(theta, g)| {
            let v = dot_f(theta, &plus);
            (-(g - eps / 2.0) * v, v)
        })
        .collect();
    let l = terms.len() as f64;
    let share = terms.iter().map(|t| t.0).sum::<f64>() / l;
    let slack = 1e-12 * share.abs().max(1e-300);
    let idx = terms
        .iter()
        .position(|&(term, v)| v > 0.0 && term <= share + slack)
        .ok_or_else(|| Error::DegenerateGap("no root of the system separates the extreme points".into()))?;
    let theta = config.sos.members[idx].clone();
    let beta = weyl_pullback(&theta, &refl);
    Ok(RootChoice {
        index: idx + 1,
        theta,
        beta,
        orientation: 1,
        log_eta_share: share,
        log_factor: terms[idx].0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub i0: usize,
    pub beta: Root,
    pub k: usize,
    /// log c.
    pub log_c: f64,
    pub j: usize,
    pub d1: Vec<usize>,
    pub d2: Vec<usize>,
    pub d11: Vec<usize>,
    pub d12: Vec<usize>,
    pub q1: usize,
    pub q2: usize,
    /// slot_to_point[s-1] is the configuration index placed in slot s.
    pub slot_to_point: Vec<usize>,
    /// Point that formed the maximal gap with the reference.
    pub gap_partner: usize,
    /// L_s for slots 1..=k.
    pub log_values: Vec<f64>,
}

impl PartitionPlan {
    fn lo_hi(&self) -> (f64, f64) {
        interval(self.log_c, self.j, self.k)
    }

    /// Point indices of the two blocks: D₁,₁ ∪ D₂ ∪ {k+1} and D₁,₂.
    pub fn blocks(&self) -> (Vec<usize>, Vec<usize>) {
        let pt = |s: usize| self.slot_to_point[s - 1];
        let mut a: Vec<usize> = self.d11.iter().chain(&self.d2).map(|&s| pt(s)).collect();
        a.push(pt(self.k + 1));
        a.sort_unstable();
        let mut b: Vec<usize> = self.d12.iter().map(|&s| pt(s)).collect();
        b.sort_unstable();
        (a, b)
    }
}

fn interval(log_c: f64, j: usize, k: usize) -> (f64, f64) {
    let at = |m: usize| if m == k { log_c } else { m as f64 * log_c / k as f64 };
    (at(j), at(j + 1))
}

/// Builds the two-block plan for the slot order produced by [`order_for_partition`].
pub fn build_partition(config: &GapConfiguration, order: &[usize], choice: &RootChoice) -> Result<PartitionPlan> {
    let n = order.len();
    if n < 2 {
        return Err(Error::Ordering("need at least two slots".into()));
    }
    let k = n - 1;
    let reference = order[k];
    let beta = &choice.beta;
    let partner = order[0];
    if config.log_root_value(beta, reference, partner) <= 0.0 {
        return Err(Error::Ordering("β must exceed 1 on the gap between slots 1 and k+1".into()));
    }
    // Put the largest value in slot 1 so that slot 1 always lands in D₁,₂.
    let mut head: Vec<usize> = order[..k].to_vec();
    let lv = |p: usize| config.log_root_value(beta, reference, p);
    let top = (0..k).fold(0, |b, i| if lv(head[i]) > lv(head[b]) { i } else { b });
    head.swap(0, top);
    let mut slot_to_point = head;
    slot_to_point.push(reference);
    let log_values: Vec<f64> = slot_to_point[..k].iter().map(|&p| lv(p)).collect();
    let l = |s: usize| if s == k + 1 { 0.0 } else { log_values[s - 1] };

    let d1: Vec<usize> = (1..=k).filter(|&s| l(s) > 0.0).collect();
    let d2: Vec<usize> = (1..=k).filter(|&s| l(s) <= 0.0).collect();
    let log_c = d1.iter().map(|&s| l(s)).fold(f64::NEG_INFINITY, f64::max);
    let j = (0..k)
        .find(|&j| {
            let (lo, hi) = interval(log_c, j, k);
            !d1.iter().any(|&s| l(s) > lo && l(s) < hi)
        })
        .ok_or_else(|| Error::Ordering("no empty subinterval; more interior values than slots".into()))?;
    let (lo, hi) = interval(log_c, j, k);
    let d11: Vec<usize> = d1.iter().copied().filter(|&s| l(s) <= lo).collect();
    let d12: Vec<usize> = d1.iter().copied().filter(|&s| l(s) > lo && l(s) >= hi).collect();
    let argbest = |set: &[usize], better: fn(f64, f64) -> bool| {
        set.iter().copied().fold(None, |b: Option<usize>, s| match b {
            Some(t) if !better(l(s), l(t)) => Some(t),
            _ => Some(s),
        })
    };
    let q1 = argbest(&d11, |a, b| a > b).unwrap_or(k + 1);
    let q2 = argbest(&d12, |a, b| a < b).ok_or_else(|| Error::Ordering("D₁,₂ is empty".into()))?;
    Ok(PartitionPlan {
        i0: choice.index,
        beta: beta.clone(),
        k,
        log_c,
        j,
        d1,
        d2,
        d11,
        d12,
        q1,
        q2,
        slot_to_point,
        gap_partner: partner,
        log_values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionVerification {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Re-derives every plan invariant from the configuration.
pub fn verify_partition(plan: &PartitionPlan, config: &GapConfiguration) -> PartitionVerification {
    let mut v = Vec::new();
    let k = plan.k;
    if plan.slot_to_point.len() != k + 1 {
        return PartitionVerification { ok: false, violations: vec!["slot map has the wrong length".into()] };
    }
    let reference = plan.slot_to_point[k];
    let l = |s: usize| {
        if s == k + 1 {
            0.0
        } else {
            config.log_root_value(&plan.beta, reference, plan.slot_to_point[s - 1])
        }
    };
    let sorted = |a: &[usize], b: &[usize]| {
        let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
        u.sort_unstable();
        u
    };
    let all: Vec<usize> = (1..=k).collect();
    if sorted(&plan.d1, &plan.d2) != all {
        v.push("D₁ and D₂ do not partition the slots".into());
    }
    if plan.d1.iter().any(|&s| l(s) <= 0.0) || plan.d2.iter().any(|&s| l(s) > 0.0) {
        v.push("D₁/D₂ disagree with the >1 test".into());
    }
    let mut d1 = plan.d1.clone();
    d1.sort_unstable();
    if sorted(&plan.d11, &plan.d12) != d1 {
        v.push("D₁,₁ and D₁,₂ do not partition D₁".into());
    }
    if !plan.d12.contains(&1) {
        v.push("slot 1 is not in D₁,₂".into());
    }
    let max_l = plan.d1.iter().map(|&s| l(s)).fold(f64::NEG_INFINITY, f64::max);
    if max_l != plan.log_c {
        v.push("log c is not the largest D₁ value".into());
    }
    let (lo, hi) = plan.lo_hi();
    if let Some(s) = plan.d1.iter().find(|&&s| l(s) > lo && l(s) < hi) {
        v.push(format!("slot {s} lies inside the chosen subinterval"));
    }
    if plan.d11.iter().any(|&s| l(s) > lo) {
        v.push("D₁,₁ value above c^{j/k}".into());
    }
    if plan.d12.iter().any(|&s| l(s) < hi) {
        v.push("D₁,₂ value below c^{(j+1)/k}".into());
    }
    let tol = 1e-12 * plan.log_c.abs().max(1.0);
    let pivot = l(plan.q2) - l(plan.q1);
    if pivot < plan.log_c / k as f64 - tol {
        v.push(format!("pivot gap {pivot:.6e} below log c / k = {:.6e}", plan.log_c / k as f64));
    }
    let lower: Vec<usize> = plan.d11.iter().chain(&plan.d2).copied().chain([k + 1]).collect();
    if lower.iter().any(|&s| l(s) > l(plan.q1) + tol) {
        v.push("β(t_i - t_{q₁}) < 1 for some i in D₁,₁ ∪ D₂ ∪ {k+1}".into());
    }
    if plan.d12.iter().any(|&s| l(s) < l(plan.q2) - tol) {
        v.push("β(t_i - t_{q₂}) > 1 for some i in D₁,₂".into());
    }
    if !(plan.d12.contains(&plan.q2) && (plan.d11.contains(&plan.q1) || (plan.d11.is_empty() && plan.q1 == k + 1))) {
        v.push("pivots are not drawn from their blocks".into());
    }
    PartitionVerification { ok: v.is_empty(), violations: v }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionNode {
    pub points: Vec<usize>,
    pub plan: Option<PartitionPlan>,
    pub children: Vec<PartitionNode>,
}

impl PartitionNode {
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> Vec<Vec<usize>> {
        if self.children.is_empty() {
            vec![self.points.clone()]
        } else {
            self.children.iter().flat_map(|c| c.leaves()).collect()
        }
    }
}

/// Applies the two-block split recursively until every block is a single point.
pub fn partition_tree(config: &GapConfiguration, eps: f64) -> Result<PartitionNode> {
    let all: Vec<usize> = (0..config.n()).collect();
    split_block(config, &all, eps)
}

fn split_block(config: &GapConfiguration, points: &[usize], eps: f64) -> Result<PartitionNode> {
    if points.len() < 2 {
        return Ok(PartitionNode { points: points.to_vec(), plan: None, children: vec![] });
    }
    let sub = config.subset(points);
    let order = order_for_partition(&sub)?;
    let choice = choose_root_index(&sub, &order, eps)?;
    let mut plan = build_partition(&sub, &order, &choice)?;
    let (a, b) = plan.blocks();
    let a: Vec<usize> = a.into_iter().map(|i| points[i]).collect();
    let b: Vec<usize> = b.into_iter().map(|i| points[i]).collect();
    for s in plan.slot_to_point.iter_mut() {
        *s = points[*s];
    }
    plan.gap_partner = points[plan.gap_partner];
    Ok(PartitionNode {
        points: points.to_vec(),
        plan: Some(plan),
        children: vec![split_block(config, &a, eps)?, split_block(config, &b, eps)?],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HigherOrderBound {
    pub n: usize,
    pub exponent: f64,
    /// max over pairs of η_ε^{exponent}.
    pub kernel: f64,
    pub max_pair: (usize, usize),
    pub bound: f64,
    /// (max‖t_i‖ + 1)^d, kept apart from the bound.
    pub penalty_factor: Option<f64>,
}

pub fn higher_order_bound(config: &GapConfiguration, eps: f64, norm_product: f64) -> Result<HigherOrderBound> {
    let n = config.n();
    if n < 2 {
        return domain("mixing order must be at least 2");
    }
    if !(norm_product >= 0.0) {
        return domain("norm product must be nonnegative");
    }
    let exponent = 1.0 / ((n - 1) * config.sos.len()) as f64;
    let mut kernel = f64::NEG_INFINITY;
    let mut max_pair = (0, 1);
    for i in 0..n {
        for j in (i + 1)..n {
            let eta = eta_epsilon(&config.sos, &config.diff(i, j), &config.gaps, eps, &config.root_system)?;
            let val = eta.powf(exponent);
            if val > kernel {
                kernel = val;
                max_pair = (i, j);
            }
        }
    }
    let penalty_factor = config.penalty.map(|d| {
        let r = config
            .points
            .iter()
            .map(|p| p.log_coords.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        (r + 1.0).powf(d)
    });
    Ok(HigherOrderBound { n, exponent, kernel, max_pair, bound: kernel * norm_product, penalty_factor })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JCase {
    J1,
    J2,
    J3,
    J4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleBound {
    pub pair: (usize, usize),
    /// η_ε at the max-gap pair, raised to 1/(2|S|).
    pub max_gap_bound: f64,
    /// min over pairs of η_ε, raised to 1/(2|S|).
    pub split_bound: f64,
    pub case: Option<JCase>,
    /// log β(t₂ - t₁) and log β(t₃ - t₁) in the slot order.
    pub log_b: Option<f64>,
    pub log_big_b: Option<f64>,
}

/// Case of the three-point analysis: with b = β(t₂ - t₁) and B = β(t₃ - t₁) > 1,
/// J1: b < 1, J2: 1 ≤ b < √B, J3: √B ≤ b ≤ B, J4: b > B; first match wins.
pub fn j_case(log_b: f64, log_big_b: f64) -> JCase {
    if log_b < 0.0 {
        JCase::J1
    } else if log_b < 0.5 * log_big_b {
        JCase::J2
    } else if log_b <= log_big_b {
        JCase::J3
    } else {
        JCase::J4
    }
}

pub fn triple_bound(config: &GapConfiguration, eps: f64) -> Result<TripleBound> {
    if config.n() != 3 {
        return domain("the triple bound needs exactly three points");
    }
    let e = 1.0 / (2 * config.sos.len()) as f64;
    let pair = max_gap_pair(config)?;
    let eta = |i: usize, j: usize| eta_epsilon(&config.sos, &config.diff(i, j), &config.gaps, eps, &config.root_system);
    let max_gap_bound = eta(pair.0, pair.1)?.powf(e);
    let split_bound = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| eta(i, j))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min)
        .powf(e);
    let order = order_for_partition(config)?;
    let (case, log_b, log_big_b) = match choose_root_index(config, &order, eps) {
        Ok(choice) => {
            let big = config.log_root_value(&choice.beta, order[2], order[0]);
            let b = config.log_root_value(&choice.beta, order[1], order[0]);
            (Some(j_case(b, big)), Some(b), Some(big))
        }
        Err(Error::DegenerateGap(_)) => (None, None, None),
        Err(e) => return Err(e),
    };
    Ok(TripleBound { pair, max_gap_bound, split_bound, case, log_b, log_big_b })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstructionInput {
    /// |∫ f₂ⁿ|.
    pub c_abs: f64,
    /// ∫ f₁².
    pub f1_sq: f64,
    pub constant: f64,
    pub norms: f64,
    /// η(m) = e^{-rate·m}.
    pub rate: f64,
    pub m_max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    /// |c|·∫f₁², the limit of the correlation.
    pub target: f64,
    /// Smallest m with C·η(m)^{1/2}·norms < target.
    pub m_star: Option<u64>,
    /// target - C·η(m*)^{1/2}·norms, a positive lower bound on the correlation.
    pub lower_bound: Option<f64>,
    pub message: String,
}

pub fn quad_obstruction_report(input: &ObstructionInput) -> Result<ObstructionReport> {
    let ObstructionInput { c_abs, f1_sq, constant, norms, rate, m_max } = *input;
    if !(c_abs > 0.0 && f1_sq > 0.0) {
        return domain("|c| and the integral of f₁² must be positive");
    }
    if !(constant >= 0.0 && norms >= 0.0 && rate >= 0.0) {
        return domain("constant, norms and rate must be nonnegative");
    }
    let target = c_abs * f1_sq;
    let upper = |m: u64| constant * norms * (-rate * m as f64 / 2.0).exp();
    let holds = |m: u64| upper(m) < target;
    let m_star = if holds(0) {
        Some(0)
    } else if rate == 0.0 {
        None
    } else {
        let guess = (2.0 * (constant * norms / target).ln() / rate).floor().max(0.0) as u64;
        let mut m = guess.saturating_sub(2);
        while !holds(m) && m <= m_max {
            m += 1;
        }
        (m <= m_max && holds(m)).then_some(m)
    };
    let lower_bound = m_star.map(|m| target - upper(m));
    let message = match m_star {
        Some(m) => format!("any uniform min-gap bound fails from m = {m} on"),
        None => "no contradiction in range".into(),
    };
    Ok(ObstructionReport { target, m_star, lower_bound, message })
}

/// Random configuration over a small classical system of the given rank, with the
/// maximal strongly orthogonal system and gaps drawn from (0, 1/2].
pub fn random_configuration(rng: &mut impl Rng, n: usize, rank: usize) -> Result<GapConfiguration> {
    let family = match rank {
        1 => Family::A,
        _ => [Family::A, Family::B, Family::C][rng.gen_range(0..3)],
    };
    let rs = build_root_system(family, rank)?;
    let sos = find_maximal_sos(&rs)?;
    let gammas: Vec<f64> = (0..sos.len()).map(|_| rng.gen_range(0.05..=0.5)).collect();
    let gaps = SpectralGapProfile::uniform(0.5, sos.len())?;
    let gaps = SpectralGapProfile::new(gammas, gaps.field_labels)?;
    let points = random_points(rng, n, rs.dim);
    GapConfiguration::new(rs, sos, gaps, points, None)
}

/// n points with coordinates uniform in [-3, 3).
pub fn random_points(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<CartanElement> {
    (0..n)
        .map(|_| CartanElement::new((0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect()))
        .collect()
}

/// Deterministic generator for configuration sweeps.
pub fn sweep_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub n: usize,
    pub rank: usize,
    pub family: Family,
    pub i0: Option<usize>,
    pub k: Option<usize>,
    pub j: Option<usize>,
    pub pivot_gap: Option<f64>,
    pub min_pivot: Option<f64>,
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Builds and verifies plans on `count` random configurations; configuration i is seeded
/// with `seed + i`, so rows do not depend on thread scheduling.
pub fn partition_sweep(count: usize, seed: u64, n_range: (usize, usize), ranks: &[usize], eps: f64) -> Vec<SweepRow> {
    use rayon::prelude::*;
    (0..count)
        .into_par_iter()
        .map(|index| {
            let mut rng = sweep_rng(seed.wrapping_add(index as u64));
            let n = rng.gen_range(n_range.0..=n_range.1);
            let rank = ranks[rng.gen_range(0..ranks.len())];
            let mut row = SweepRow {
                index,
                n,
                rank,
                family: Family::A,
                i0: None,
                k: None,
                j: None,
                pivot_gap: None,
                min_pivot: None,
                ok: false,
                violations: vec![],
            };
            let result = random_configuration(&mut rng, n, rank).and_then(|c| {
                row.family = c.root_system.family;
                let order = order_for_partition(&c)?;
                let choice = choose_root_index(&c, &order, eps)?;
                let plan = build_partition(&c, &order, &choice)?;
                Ok((verify_partition(&plan, &c), plan))
            });
            match result {
                Ok((v, plan)) => {
                    let l = |s: usize| if s == plan.k + 1 { 0.0 } else { plan.log_values[s - 1] };
                    row.i0 = Some(plan.i0);
                    row.k = Some(plan.k);
                    row.j = Some(plan.j);
                    row.pivot_gap = Some(l(plan.q2) - l(plan.q1));
                    row.min_pivot = Some(plan.log_c / plan.k as f64);
                    row.ok = v.ok;
                    row.violations = v.violations;
                }
                Err(e) => row.violations.push(e.to_string()),
            }
            row
        })
        .collect()
}
