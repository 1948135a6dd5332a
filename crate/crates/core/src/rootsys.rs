//! Root systems, strongly orthogonal systems and the exponent calculus built on them.
//!
//! Roots are exact integer vectors in the standard orthogonal basis of the ambient
//! space (dimension `rank + 1` for type A and G2, `rank` otherwise). Floating point
//! enters only once a Cartan element is evaluated on a root.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest positive-root count accepted by the exhaustive SOS search.
pub const SOS_SEARCH_CAP: usize = 24;

const MAX_RANK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    G2,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "G2" | "G" => Ok(Family::G2),
            other => Err(Error::Configuration(format!("unknown root family `{other}`"))),
        }
    }
}

/// Real or complex root subgroup; decides which regularity exponent a root carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum FieldLabel {
    #[default]
    R,
    C,
}

pub type Root = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSystem {
    pub family: Family,
    pub rank: usize,
    /// Dimension of the ambient coordinate space.
    pub dim: usize,
    pub roots: Vec<Root>,
    pub positive_roots: Vec<Root>,
    pub simple_roots: Vec<Root>,
    /// One label per positive root, aligned with `positive_roots`.
    pub field_labels: Vec<FieldLabel>,
}

fn unit(dim: usize, i: usize, c: i64) -> Root {
    let mut v = vec![0; dim];
    v[i] = c;
    v
}

fn add(a: &[i64], b: &[i64]) -> Root {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[i64], b: &[i64]) -> Root {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn neg(a: &[i64]) -> Root {
    a.iter().map(|x| -x).collect()
}

fn dot_i(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn dot_f(root: &[i64], x: &[f64]) -> f64 {
    root.iter().zip(x).map(|(&r, &v)| r as f64 * v).sum()
}

/// All roots ±e_i ± e_j (i < j) in dimension `dim`.
fn long_pairs(dim: usize, roots: &mut Vec<Root>) {
    for i in 0..dim {
        for j in (i + 1)..dim {
            for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mut v = vec![0; dim];
                v[i] = si;
                v[j] = sj;
                roots.push(v);
            }
        }
    }
}

/// Solves `root = Σ c_i α_i` over the simple roots, returning integer coefficients
/// when the root lies in their integer span.
fn simple_coefficients(simple: &[Root], root: &[i64]) -> Option<Vec<i64>> {
    let r = simple.len();
    let mut m = vec![vec![0.0f64; r + 1]; r];
    for i in 0..r {
        for j in 0..r {
            m[i][j] = dot_i(&simple[i], &simple[j]) as f64;
        }
        m[i][r] = dot_i(&simple[i], root) as f64;
    }
    for col in 0..r {
        let piv = (col..r).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        for row in 0..r {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..=r {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    let coeffs: Vec<i64> = (0..r).map(|i| (m[i][r] / m[i][i]).round() as i64).collect();
    let mut back = vec![0i64; root.len()];
    for (c, a) in coeffs.iter().zip(simple) {
        for (b, x) in back.iter_mut().zip(a) {
            *b += c * x;
        }
    }
    (back == root).then_some(coeffs)
}

/// Builds the root system of the given classical family (or G2).
pub fn build_root_system(family: Family, rank: usize) -> Result<RootSystem> {
    let bad = |msg: &str| Err(Error::Configuration(format!("{family:?}{rank}: {msg}")));
    if rank == 0 || rank > MAX_RANK {
        return bad("rank must lie in 1..=8");
    }
    let (dim, roots, simple) = match family {
        Family::A => {
            let dim = rank + 1;
            let mut roots = Vec::new();
            for i in 0..dim {
                for j in 0..dim {
                    if i != j {
                        roots.push(sub(&unit(dim, i, 1), &unit(dim, j, 1)));
                    }
                }
            }
            let simple = (0..rank)
                .map(|i| sub(&unit(dim, i, 1), &unit(dim, i + 1, 1)))
                .collect::<Vec<_>>();
            (dim, roots, simple)
        }
        Family::B | Family::C => {
            if rank < 2 {
                return bad("types B and C need rank >= 2");
            }
            let dim = rank;
            let short = if family == Family::B { 1 } else { 2 };
            let mut roots = Vec::new();
            long_pairs(dim, &mut roots);
            for i in 0..dim {
                roots.push(unit(dim, i, short));
                roots.push(unit(dim, i, -short));
            }
            let mut simple = (0..rank - 1)
                .map(|i| sub(&unit(dim, i, 1), &unit(dim, i + 1, 1)))
                .collect::<Vec<_>>();
            simple.push(unit(dim, rank - 1, short));
            (dim, roots, simple)
        }
        Family::D => {
            if rank < 3 {
                return bad("type D needs rank >= 3");
            }
            let dim = rank;
            let mut roots = Vec::new();
            long_pairs(dim, &mut roots);
            let mut simple = (0..rank - 1)
                .map(|i| sub(&unit(dim, i, 1), &unit(dim, i + 1, 1)))
                .collect::<Vec<_>>();
            simple.push(add(&unit(dim, rank - 2, 1), &unit(dim, rank - 1, 1)));
            (dim, roots, simple)
        }
        Family::G2 => {
            if rank != 2 {
                return bad("G2 has rank 2");
            }
            let dim = 3;
            let mut roots = Vec::new();
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        roots.push(sub(&unit(3, i, 1), &unit(3, j, 1)));
                    }
                }
                let long: Root = (0..3).map(|k| if k == i { 2 } else { -1 }).collect();
                roots.push(neg(&long));
                roots.push(long);
            }
            let simple = vec![vec![1, -1, 0], vec![-2, 1, 1]];
            (dim, roots, simple)
        }
    };
    let positive_roots: Vec<Root> = roots
        .iter()
        .filter(|r| {
            simple_coefficients(&simple, r)
                .map(|c| c.iter().all(|&x| x >= 0))
                .unwrap_or(false)
        })
        .cloned()
        .collect();
    let rs = RootSystem {
        family,
        rank,
        dim,
        field_labels: vec![FieldLabel::R; positive_roots.len()],
        roots,
        positive_roots,
        simple_roots: simple,
    };
    rs.check_invariants()?;
    Ok(rs)
}

/// Classical count of positive roots.
pub fn expected_positive_count(family: Family, rank: usize) -> usize {
    match family {
        Family::A => rank * (rank + 1) / 2,
        Family::B | Family::C => rank * rank,
        Family::D => rank * (rank - 1),
        Family::G2 => 6,
    }
}

impl RootSystem {
    fn check_invariants(&self) -> Result<()> {
        let set: HashSet<&Root> = self.roots.iter().collect();
        if self.roots.iter().any(|r| !set.contains(&neg(r))) {
            return Err(Error::Configuration("roots not closed under negation".into()));
        }
        if self.positive_roots.len() * 2 != self.roots.len()
            || self.positive_roots.len() != expected_positive_count(self.family, self.rank)
        {
            return Err(Error::Configuration("positive root count mismatch".into()));
        }
        Ok(())
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.roots.iter().any(|r| r == v)
    }

    pub fn positive_index(&self, v: &[i64]) -> Option<usize> {
        self.positive_roots.iter().position(|r| r == v)
    }

    pub fn coefficients(&self, root: &[i64]) -> Option<Vec<i64>> {
        simple_coefficients(&self.simple_roots, root)
    }

    pub fn field_label(&self, root: &[i64]) -> FieldLabel {
        self.positive_index(root)
            .map(|i| self.field_labels[i])
            .unwrap_or_default()
    }

    pub fn set_field_label(&mut self, root: &[i64], label: FieldLabel) -> Result<()> {
        let i = self
            .positive_index(root)
            .ok_or_else(|| Error::Domain(format!("{root:?} is not a positive root")))?;
        self.field_labels[i] = label;
        Ok(())
    }

    /// Reflection of a real vector in the hyperplane orthogonal to `root`.
    pub fn reflect(root: &[i64], x: &[f64]) -> Vec<f64> {
        let rr = dot_i(root, root) as f64;
        let k = 2.0 * dot_f(root, x) / rr;
        x.iter().zip(root).map(|(&v, &r)| v - k * r as f64).collect()
    }

    /// Weyl orbit of `x`, generated breadth-first from the simple reflections.
    pub fn weyl_orbit(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let key = |v: &[f64]| -> Vec<i64> { v.iter().map(|c| (c * 1e9).round() as i64).collect() };
        let mut seen = HashSet::new();
        let mut orbit = vec![x.to_vec()];
        seen.insert(key(x));
        let mut head = 0;
        while head < orbit.len() {
            let cur = orbit[head].clone();
            head += 1;
            for a in &self.simple_roots {
                let y = Self::reflect(a, &cur);
                if seen.insert(key(&y)) {
                    orbit.push(y);
                }
            }
        }
        orbit
    }

    pub fn is_dominant(&self, x: &[f64]) -> bool {
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        self.simple_roots
            .iter()
            .all(|a| dot_f(a, x) >= -1e-12 * scale)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StronglyOrthogonalSystem {
    pub members: Vec<Root>,
    /// Simple-root coefficients of the formal sum of the members.
    pub formal_sum_coeffs: Vec<i64>,
    pub maximal: bool,
}

impl StronglyOrthogonalSystem {
    /// Wraps a checked list of members; `maximal` is left false.
    pub fn from_members(rs: &RootSystem, members: Vec<Root>) -> Result<Self> {
        if !is_strongly_orthogonal(&members, rs)? {
            return domain("members are not strongly orthogonal");
        }
        Ok(Self {
            formal_sum_coeffs: formal_sum(rs, &members),
            members,
            maximal: false,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn formal_sum(rs: &RootSystem, members: &[Root]) -> Vec<i64> {
    let mut acc = vec![0; rs.simple_roots.len()];
    for m in members {
        let c = rs.coefficients(m).expect("positive roots decompose over simple roots");
        for (a, x) in acc.iter_mut().zip(c) {
            *a += x;
        }
    }
    acc
}

fn pair_strongly_orthogonal(rs: &RootSystem, a: &[i64], b: &[i64]) -> bool {
    a != b && !rs.contains(&add(a, b)) && !rs.contains(&sub(a, b))
}

pub fn is_strongly_orthogonal(candidate: &[Root], rs: &RootSystem) -> Result<bool> {
    for c in candidate {
        if rs.positive_index(c).is_none() {
            return domain(format!("{c:?} is not a positive root of {:?}{}", rs.family, rs.rank));
        }
    }
    for (i, a) in candidate.iter().enumerate() {
        for b in &candidate[i + 1..] {
            if !pair_strongly_orthogonal(rs, a, b) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Every strongly orthogonal subset of the positive roots that cannot be enlarged,
/// as index lists into `positive_roots`, in lexicographic order.
pub fn inclusion_maximal_systems(rs: &RootSystem) -> Result<Vec<Vec<usize>>> {
    let n = rs.positive_roots.len();
    if n > SOS_SEARCH_CAP {
        return Err(Error::Capacity(format!(
            "{n} positive roots exceed the exhaustive search cap {SOS_SEARCH_CAP}"
        )));
    }
    let compat: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    pair_strongly_orthogonal(rs, &rs.positive_roots[i], &rs.positive_roots[j])
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    extend(&compat, 0, &mut current, &mut out);
    Ok(out)
}

fn extend(compat: &[Vec<bool>], start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let n = compat.len();
    let mut grew = false;
    for i in start..n {
        if current.iter().all(|&c| compat[c][i]) {
            grew = true;
            current.push(i);
            extend(compat, i + 1, current, out);
            current.pop();
        }
    }
    if !grew {
        // Only keep sets that no earlier root could extend either.
        let maximal = (0..n).all(|i| current.contains(&i) || current.iter().any(|&c| !compat[c][i]));
        if maximal {
            out.push(current.clone());
        }
    }
}

/// Strongly orthogonal system whose formal sum dominates all others coefficientwise.
///
/// When no dominating system exists the result is a largest one with
/// `maximal = false`.
pub fn find_maximal_sos(rs: &RootSystem) -> Result<StronglyOrthogonalSystem> {
    let systems = inclusion_maximal_systems(rs)?;
    let sums: Vec<Vec<i64>> = systems
        .iter()
        .map(|s| {
            let members: Vec<Root> = s.iter().map(|&i| rs.positive_roots[i].clone()).collect();
            formal_sum(rs, &members)
        })
        .collect();
    let dominates = |a: &[i64], b: &[i64]| a.iter().zip(b).all(|(x, y)| x >= y);
    let pick = (0..systems.len()).find(|&i| sums.iter().all(|s| dominates(&sums[i], s)));
    let (idx, maximal) = match pick {
        Some(i) => (i, true),
        None => {
            let best = (0..systems.len())
                .max_by(|&a, &b| {
                    systems[a]
                        .len()
                        .cmp(&systems[b].len())
                        .then(sums[a].iter().sum::<i64>().cmp(&sums[b].iter().sum::<i64>()))
                        .then(b.cmp(&a))
                })
                .ok_or_else(|| Error::Configuration("empty root system".into()))?;
            (best, false)
        }
    };
    Ok(StronglyOrthogonalSystem {
        members: systems[idx].iter().map(|&i| rs.positive_roots[i].clone()).collect(),
        formal_sum_coeffs: sums[idx].clone(),
        maximal,
    })
}

/// Element of the split Cartan subgroup, stored through its logarithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanElement {
    pub log_coords: Vec<f64>,
}

impl CartanElement {
    pub fn new(log_coords: Vec<f64>) -> Self {
        Self { log_coords }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![0.0; dim])
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.log_coords.iter().map(|x| -x).collect())
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::new(self.log_coords.iter().zip(&other.log_coords).map(|(a, b)| a + b).collect())
    }

    /// log θ(a).
    pub fn log_root_value(&self, root: &[i64]) -> f64 {
        dot_f(root, &self.log_coords)
    }

    /// θ(a).
    pub fn root_value(&self, root: &[i64]) -> f64 {
        self.log_root_value(root).exp()
    }
}

/// Folds `x` into the closed positive chamber by simple reflections.
///
/// Returns the dominant element together with the reflections applied, in order,
/// so that roots can be pulled back along the same Weyl element.
pub fn weyl_fold(x: &[f64], rs: &RootSystem) -> (Vec<f64>, Vec<Root>) {
    let mut cur = x.to_vec();
    let mut applied = Vec::new();
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    // Each reflection strictly raises the pairing with the Weyl vector, so this ends.
    while let Some(a) = rs
        .simple_roots
        .iter()
        .find(|a| dot_f(a, &cur) < -1e-12 * scale)
    {
        cur = RootSystem::reflect(a, &cur);
        applied.push(a.clone());
    }
    (cur, applied)
}

/// β = w⁻¹θ for the Weyl element w recorded by [`weyl_fold`]; then β(x) = θ(x⁺).
pub fn weyl_pullback(theta: &[i64], reflections: &[Root]) -> Root {
    let mut beta = theta.to_vec();
    for a in reflections.iter().rev() {
        let k = 2 * dot_i(&beta, a) / dot_i(a, a);
        beta = beta.iter().zip(a).map(|(b, x)| b - k * x).collect();
    }
    beta
}

/// The representative of the Weyl orbit of `a` in the closed positive chamber.
pub fn weyl_positive(a: &CartanElement, rs: &RootSystem) -> CartanElement {
    if rs.is_dominant(&a.log_coords) {
        return a.clone();
    }
    let orbit = rs.weyl_orbit(&a.log_coords);
    let best = orbit
        .into_iter()
        .filter(|x| rs.is_dominant(x))
        .max_by(|x, y| {
            let sx: f64 = rs.simple_roots.iter().map(|r| dot_f(r, x)).sum();
            let sy: f64 = rs.simple_roots.iter().map(|r| dot_f(r, y)).sum();
            sx.total_cmp(&sy)
        })
        .expect("every Weyl orbit meets the closed positive chamber");
    CartanElement::new(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGapProfile {
    /// γ_θ per member of the strongly orthogonal system, in member order.
    pub gammas: Vec<f64>,
    pub field_labels: Vec<FieldLabel>,
}

impl SpectralGapProfile {
    pub fn new(gammas: Vec<f64>, field_labels: Vec<FieldLabel>) -> Result<Self> {
        if gammas.len() != field_labels.len() {
            return domain("one field label per gap");
        }
        for (&g, &f) in gammas.iter().zip(&field_labels) {
            let ok = match f {
                FieldLabel::C => g > 0.0 && g <= 1.0,
                FieldLabel::R => (g > 0.0 && g <= 0.5) || (g > 0.0 && (2.0 * g).fract() == 0.0),
            };
            if !ok {
                return domain(format!("gap {g} not admissible for a {f:?} root"));
            }
        }
        Ok(Self { gammas, field_labels })
    }

    pub fn uniform(gamma: f64, len: usize) -> Result<Self> {
        Self::new(vec![gamma; len], vec![FieldLabel::R; len])
    }

    pub fn min_gamma(&self) -> f64 {
        self.gammas.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_profile(s: &StronglyOrthogonalSystem, gaps: &SpectralGapProfile) -> Result<()> {
    if s.members.len() != gaps.gammas.len() {
        return domain("gap profile length differs from the system size");
    }
    Ok(())
}

/// η_ε(S, a) = Π_{θ∈S} θ(a⁺)^{-(γ_θ-ε)}.
pub fn eta_epsilon(
    s: &StronglyOrthogonalSystem,
    a: &CartanElement,
    gaps: &SpectralGapProfile,
    eps: f64,
    rs: &RootSystem,
) -> Result<f64> {
    Ok(log_eta_epsilon(s, a, gaps, eps, rs)?.exp())
}

/// log η_ε(S, a); kept separate so callers can stay in log space.
pub fn log_eta_epsilon(
    s: &StronglyOrthogonalSystem,
    a: &CartanElement,
    gaps: &SpectralGapProfile,
    eps: f64,
    rs: &RootSystem,
) -> Result<f64> {
    check_profile(s, gaps)?;
    if !s.is_empty() && !(eps > 0.0 && eps < gaps.min_gamma()) {
        return domain(format!("epsilon {eps} must lie in (0, min gamma)"));
    }
    let plus = weyl_positive(a, rs);
    Ok(s
        .members
        .iter()
        .zip(&gaps.gammas)
        .map(|(theta, g)| -(g - eps) * plus.log_root_value(theta))
        .sum())
}

/// (ζ_ε(S), p_ε(S)).
pub fn regularity_exponents(
    s: &StronglyOrthogonalSystem,
    gaps: &SpectralGapProfile,
    eps: f64,
) -> Result<(f64, f64)> {
    check_profile(s, gaps)?;
    if eps <= 0.0 {
        return domain("epsilon must be positive");
    }
    let mut zeta = 0.0;
    let mut p = 0.0;
    for (&g, &f) in gaps.gammas.iter().zip(&gaps.field_labels) {
        zeta += zeta_single(g, f, eps);
        p += g - eps;
    }
    Ok((zeta, p))
}

pub fn zeta_single(gamma: f64, field: FieldLabel, eps: f64) -> f64 {
    match field {
        FieldLabel::C => 1.0 + eps,
        FieldLabel::R => gamma + 2.0 + eps,
    }
}

/// γ(s) = min{s/(4 s₀), 1/2}.
pub fn holder_gamma(s: f64, s0: f64) -> Result<f64> {
    if !(s > 0.0 && s0 > 0.0) {
        return domain("holder_gamma needs s > 0 and s0 > 0");
    }
    Ok((s / (4.0 * s0)).min(0.5))
}

/// η^{1/((n-1)|S|)}.
pub fn mixing_exponent(n: usize, sos_size: usize, eta: f64) -> Result<f64> {
    if n < 2 {
        return domain("mixing order must be at least 2");
    }
    if sos_size == 0 {
        return domain("strongly orthogonal system must be nonempty");
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return domain("eta must lie in (0, 1]");
    }
    Ok(eta.powf(1.0 / ((n - 1) * sos_size) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rs(f: Family, r: usize) -> RootSystem {
        build_root_system(f, r).unwrap()
    }

    #[test]
    fn positive_root_counts() {
        for (f, r) in [
            (Family::A, 1),
            (Family::A, 4),
            (Family::B, 3),
            (Family::C, 4),
            (Family::D, 4),
            (Family::D, 5),
            (Family::G2, 2),
        ] {
            assert_eq!(rs(f, r).positive_roots.len(), expected_positive_count(f, r));
        }
    }

    #[test]
    fn b2_enumeration() {
        let b2 = rs(Family::B, 2);
        let mut got = b2.positive_roots.clone();
        got.sort();
        let mut want = vec![vec![1, -1], vec![1, 1], vec![1, 0], vec![0, 1]];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn bad_configurations() {
        assert!(matches!(build_root_system(Family::G2, 3), Err(Error::Configuration(_))));
        assert!(build_root_system(Family::D, 2).is_err());
        assert!(build_root_system(Family::A, 0).is_err());
    }

    #[test]
    fn strong_orthogonality_examples() {
        let a3 = rs(Family::A, 3);
        assert!(is_strongly_orthogonal(&[vec![1, -1, 0, 0], vec![0, 0, 1, -1]], &a3).unwrap());
        assert!(!is_strongly_orthogonal(&[vec![1, -1, 0, 0], vec![0, 1, -1, 0]], &a3).unwrap());
        assert!(is_strongly_orthogonal(&[vec![1, -1]], &rs(Family::A, 1)).unwrap());
        assert!(is_strongly_orthogonal(&[vec![-1, 1, 0, 0]], &a3).is_err());
    }

    #[test]
    fn b2_and_a1_maximal() {
        let s = find_maximal_sos(&rs(Family::B, 2)).unwrap();
        assert!(s.maximal);
        let mut m = s.members.clone();
        m.sort();
        assert_eq!(m, vec![vec![1, -1], vec![1, 1]]);
        let a1 = find_maximal_sos(&rs(Family::A, 1)).unwrap();
        assert_eq!(a1.members, vec![vec![1, -1]]);
    }

    #[test]
    fn search_cap() {
        // A7 has 28 positive roots.
        assert!(matches!(find_maximal_sos(&rs(Family::A, 7)), Err(Error::Capacity(_))));
    }

    #[test]
    fn weyl_positive_examples() {
        let a1 = rs(Family::A, 1);
        let a = CartanElement::new(vec![-0.5, 0.5]);
        let p = weyl_positive(&a, &a1);
        assert_relative_eq!(p.log_root_value(&[1, -1]), 1.0);
        let dom = CartanElement::new(vec![0.7, 0.1]);
        assert_eq!(weyl_positive(&dom, &a1), dom);
        let b2 = rs(Family::B, 2);
        assert_eq!(b2.weyl_orbit(&[0.3, -1.2]).len(), 8);
        let p = weyl_positive(&CartanElement::new(vec![0.3, -1.2]), &b2);
        assert_relative_eq!(p.log_coords[0], 1.2);
        assert_relative_eq!(p.log_coords[1], 0.3);
    }

    #[test]
    fn eta_examples() {
        let a1 = rs(Family::A, 1);
        let s = find_maximal_sos(&a1).unwrap();
        let gaps = SpectralGapProfile::uniform(0.5, 1).unwrap();
        let id = CartanElement::identity(2);
        assert_eq!(eta_epsilon(&s, &id, &gaps, 0.1, &a1).unwrap(), 1.0);
        // θ(a⁺) = e²
        let a = CartanElement::new(vec![1.0, -1.0]);
        assert_relative_eq!(eta_epsilon(&s, &a, &gaps, 0.1, &a1).unwrap(), (-0.8f64).exp(), epsilon = 1e-15);
        assert!(eta_epsilon(&s, &a, &gaps, 0.6, &a1).is_err());
    }

    #[test]
    fn exponents() {
        let a1 = rs(Family::A, 1);
        let s = find_maximal_sos(&a1).unwrap();
        let (z, p) = regularity_exponents(&s, &SpectralGapProfile::uniform(0.5, 1).unwrap(), 0.1).unwrap();
        assert_relative_eq!(z, 2.6);
        assert_relative_eq!(p, 0.4);
        let c = SpectralGapProfile::new(vec![0.8], vec![FieldLabel::C]).unwrap();
        assert_relative_eq!(regularity_exponents(&s, &c, 0.1).unwrap().0, 1.1);
        let empty = StronglyOrthogonalSystem { members: vec![], formal_sum_coeffs: vec![0], maximal: false };
        let none = SpectralGapProfile::new(vec![], vec![]).unwrap();
        assert_eq!(regularity_exponents(&empty, &none, 0.1).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn gap_profile_ranges() {
        assert!(SpectralGapProfile::new(vec![1.2], vec![FieldLabel::C]).is_err());
        assert!(SpectralGapProfile::new(vec![0.7], vec![FieldLabel::R]).is_err());
        assert!(SpectralGapProfile::new(vec![1.5], vec![FieldLabel::R]).is_ok());
    }

    #[test]
    fn holder_and_mixing() {
        assert_eq!(holder_gamma(4.0, 1.0).unwrap(), 0.5);
        assert_eq!(holder_gamma(2.0, 2.0).unwrap(), 0.25);
        assert_relative_eq!(holder_gamma(0.1, 1.0).unwrap(), 0.025);
        assert!(holder_gamma(0.0, 1.0).is_err());
        let e = std::f64::consts::E;
        assert_relative_eq!(mixing_exponent(2, 1, 1.0 / e).unwrap(), 1.0 / e);
        assert_relative_eq!(mixing_exponent(3, 2, 1.0 / e).unwrap(), (-0.25f64).exp());
        assert_eq!(mixing_exponent(7, 3, 1.0).unwrap(), 1.0);
        assert!(mixing_exponent(1, 1, 0.5).is_err());
    }

    #[test]
    fn json_round_trip() {
        let a3 = rs(Family::A, 3);
        let s = find_maximal_sos(&a3).unwrap();
        let back: StronglyOrthogonalSystem =
            serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let back: RootSystem = serde_json::from_str(&serde_json::to_string(&a3).unwrap()).unwrap();
        assert_eq!(back, a3);
    }

    #[test]
    fn fold_agrees_with_orbit() {
        for (f, r, x) in [
            (Family::B, 2, vec![0.3, -1.2]),
            (Family::A, 3, vec![-0.4, 1.1, 0.2, -0.9]),
            (Family::C, 3, vec![-0.1, 0.7, -2.0]),
            (Family::G2, 2, vec![0.5, -0.2, -0.3]),
        ] {
            let sys = rs(f, r);
            let (folded, refl) = weyl_fold(&x, &sys);
            let orbit = weyl_positive(&CartanElement::new(x.clone()), &sys);
            for (a, b) in folded.iter().zip(&orbit.log_coords) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
            for theta in &sys.positive_roots {
                let beta = weyl_pullback(theta, &refl);
                assert!(sys.contains(&beta));
                assert_relative_eq!(dot_f(&beta, &x), dot_f(theta, &folded), epsilon = 1e-12);
            }
        }
    }
}
