//! Matrix-coefficient decay along the geodesic and horocycle flows, rate fits and
//! the order-two bound-shape check on tensor models.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::directint::{TensorModel, TensorVector};
use crate::error::{domain, Error, Result};
use crate::sl2model::{apply_generator, flow_apply, matrix_coefficient, Flow, Generator, IrrepParams, ModelVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Geodesic,
    Horocycle,
}

impl FlowKind {
    pub fn at(self, time: f64) -> Flow {
        match self {
            FlowKind::Geodesic => Flow::Geodesic(time),
            FlowKind::Horocycle => Flow::Horocycle(time),
        }
    }
}

impl std::str::FromStr for FlowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geodesic" => Ok(FlowKind::Geodesic),
            "horocycle" => Ok(FlowKind::Horocycle),
            other => Err(Error::Configuration(format!("unknown flow `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayCurve {
    pub flow: FlowKind,
    pub times: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// |⟨ψ, ξ⟩|, the scale of the noise floor.
    pub reference: f64,
}

/// Largest share of ‖ξ‖² allowed where the flowed ψ had to be sampled beyond the grid.
pub const DEFAULT_LOSS_BUDGET: f64 = 1e-4;

/// Share of ‖ξ‖² on nodes whose geodesic preimage e^{-2s}λ lies beyond the grid.
fn outside_share(xi: &ModelVector, s: f64) -> f64 {
    let g = &xi.grid;
    let total = xi.norm_sq();
    if total == 0.0 {
        return 0.0;
    }
    let limit = g.config.lambda_max * (1.0 + 1e-12);
    let out: f64 = g
        .nodes
        .iter()
        .zip(&g.weights)
        .zip(&xi.values)
        .filter(|((l, _), _)| l.abs() * (-2.0 * s).exp() > limit)
        .map(|((_, w), v)| w * v.norm_sqr())
        .sum();
    out / total
}

/// |⟨flow(t) ψ, ξ⟩| over the given times.
pub fn coeff_curve(
    psi: &ModelVector,
    xi: &ModelVector,
    flow: FlowKind,
    times: &[f64],
    irrep: &IrrepParams,
    loss_budget: f64,
) -> Result<DecayCurve> {
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return domain("times must be strictly increasing");
    }
    if flow == FlowKind::Geodesic && psi.profile.is_none() {
        let mut order = times.to_vec();
        order.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        let mut last_ok = None;
        for &s in &order {
            let share = outside_share(xi, s);
            if share > loss_budget {
                return Err(Error::Truncation {
                    message: format!("at s = {s}, {share:.2e} of the pairing vector lies beyond the resampled range"),
                    last_reliable: last_ok,
                });
            }
            last_ok = Some(s);
        }
    }
    let magnitudes = times
        .par_iter()
        .map(|&t| matrix_coefficient(psi, xi, flow.at(t), irrep).map(|c| c.norm()))
        .collect::<Result<Vec<_>>>()?;
    let reference = psi.inner(xi).norm();
    Ok(DecayCurve { flow, times: times.to_vec(), magnitudes, reference })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub window: (f64, f64),
    /// Samples below floor·reference are dropped.
    pub floor: f64,
    pub min_samples: usize,
}

impl FitConfig {
    pub fn for_flow(flow: FlowKind) -> Self {
        let window = match flow {
            FlowKind::Geodesic => (1.0, 6.0),
            FlowKind::Horocycle => (5.0, 200.0),
        };
        Self { window, floor: 1e-10, min_samples: 10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateFit {
    pub flow: FlowKind,
    /// Rate in units of 2s (geodesic) or of log(1+t) (horocycle).
    pub exponent: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
}

pub fn fit_rate(curve: &DecayCurve) -> Result<RateFit> {
    fit_rate_with(curve, &FitConfig::for_flow(curve.flow))
}

pub fn fit_rate_with(curve: &DecayCurve, cfg: &FitConfig) -> Result<RateFit> {
    let floor = cfg.floor * if curve.reference > 0.0 { curve.reference } else { curve.magnitudes.iter().fold(0.0, |a: f64, &b| a.max(b)) };
    let pts: Vec<(f64, f64)> = curve
        .times
        .iter()
        .zip(&curve.magnitudes)
        .filter(|(&t, &m)| t >= cfg.window.0 && t <= cfg.window.1 && m > floor && m.is_finite())
        .map(|(&t, &m)| {
            let x = match curve.flow {
                FlowKind::Geodesic => 2.0 * t,
                FlowKind::Horocycle => (1.0 + t).ln(),
            };
            (x, m.ln())
        })
        .collect();
    if pts.len() < cfg.min_samples {
        return Err(Error::Fit(format!(
            "{} samples in the window {:?}, need {}",
            pts.len(),
            cfg.window,
            cfg.min_samples
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all samples at one abscissa".into()));
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let icpt = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RateFit { flow: curve.flow, exponent: -slope, window: cfg.window, samples: pts.len(), residual })
}

/// Evenly spaced samples on [a, b].
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Geometrically spaced samples on [a, b], a > 0.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Order2Row {
    /// Geodesic time per factor; θ_i(a) = e^{2 s_i}.
    pub a: Vec<f64>,
    pub lhs: f64,
    pub eta: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Order2Check {
    pub rows: Vec<Order2Row>,
    pub max_ratio: f64,
    /// Even orders used for the U-directions and the X,V-directions.
    pub p_order: usize,
    pub zeta_order: usize,
    pub psi_norm: f64,
    pub xi_norm: f64,
}

fn rank_one(v: &TensorVector) -> Result<&crate::directint::TensorTerm> {
    match v.terms.as_slice() {
        [t] => Ok(t),
        _ => domain("the order-two check takes rank-one tensor vectors"),
    }
}

/// Partial Sobolev norm over words in per-factor generators, up to `order`.
fn partial_norm(term: &crate::directint::TensorTerm, model: &TensorModel, gens: &[Generator], order: usize) -> Result<f64> {
    let n = term.factors.len();
    // norms[i][word over gens]: memoized per-factor subword norms.
    let mut memo: Vec<HashMap<Vec<usize>, (ModelVector, f64)>> = vec![HashMap::new(); n];
    fn subword_norm(
        memo: &mut HashMap<Vec<usize>, (ModelVector, f64)>,
        base: &ModelVector,
        word: &[usize],
        gens: &[Generator],
        irrep: &IrrepParams,
    ) -> Result<f64> {
        if let Some((_, nrm)) = memo.get(word) {
            return Ok(*nrm);
        }
        let v = if word.is_empty() {
            base.clone()
        } else {
            subword_norm(memo, base, &word[1..], gens, irrep)?;
            let inner = memo[&word[1..]].0.clone();
            apply_generator(&inner, gens[word[0]], irrep)?
        };
        let nrm = v.norm();
        memo.insert(word.to_vec(), (v, nrm));
        Ok(nrm)
    }
    let letters = n * gens.len();
    let mut total = 0.0;
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for len in 0..=order {
        for w in &frontier {
            let mut prod = term.coeff.norm_sqr()
                * term
                    .components
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| model.factors[i].components[c].1)
                    .product::<f64>();
            for i in 0..n {
                let sub: Vec<usize> = w.iter().filter(|&&l| l / gens.len() == i).map(|&l| l % gens.len()).collect();
                let ir = model.irrep(i, term.components[i]);
                let nrm = subword_norm(&mut memo[i], &term.factors[i], &sub, gens, ir)?;
                prod *= nrm * nrm;
            }
            total += prod;
        }
        if len < order {
            frontier = frontier
                .iter()
                .flat_map(|w| {
                    (0..letters).map(move |l| {
                        let mut nw = w.clone();
                        nw.push(l);
                        nw
                    })
                })
                .collect();
        }
    }
    Ok(total.sqrt())
}

/// Compares |⟨ρ(a)ψ, ξ⟩| with η_ε(a)·‖ψ‖_{U, p}·‖ξ‖_{X,V, ζ} over an a-grid, where
/// factor i is matched with one root θ_i and θ_i(a) = e^{2 s_i}.
pub fn order2_bound_check(
    psi: &TensorVector,
    xi: &TensorVector,
    model: &TensorModel,
    a_grid: &[Vec<f64>],
) -> Result<Order2Check> {
    let tp = rank_one(psi)?;
    let tx = rank_one(xi)?;
    if tp.components != tx.components {
        return domain("ψ and ξ must live on the same component tuple");
    }
    let eps = model.eps;
    let p: f64 = model.gaps.iter().map(|g| g.gamma - eps).sum();
    let zeta: f64 = model.gaps.iter().map(|g| g.zeta).sum();
    if p <= 0.0 {
        return domain("epsilon must lie below every gap");
    }
    let p_order = 2 * (p / 2.0).ceil() as usize;
    let zeta_order = 2 * (zeta / 2.0).ceil() as usize;
    let psi_norm = partial_norm(tp, model, &[Generator::U], p_order)?;
    let xi_norm = partial_norm(tx, model, &[Generator::X, Generator::V], zeta_order)?;
    let weight: f64 = tp.components.iter().enumerate().map(|(i, &c)| model.factors[i].components[c].1).product();
    let rows = a_grid
        .par_iter()
        .map(|a| {
            if a.len() != model.len() || a.iter().any(|&s| s < 0.0) {
                return domain("each grid point needs one nonnegative time per factor");
            }
            // ⟨ρ(a)ψ, ξ⟩ = ⟨ψ, ρ(a)⁻¹ξ⟩ and ρ(a)⁻¹ is the model flow at time +s.
            let mut c = tp.coeff * tx.coeff.conj() * weight;
            for (i, &s) in a.iter().enumerate() {
                let ir = model.irrep(i, tp.components[i]);
                let moved = flow_apply(&tx.factors[i], Flow::Geodesic(s), ir)?.vector;
                c *= tp.factors[i].inner(&moved);
            }
            let lhs = c.norm();
            let eta = (-a.iter().zip(&model.gaps).map(|(s, g)| 2.0 * s * (g.gamma - eps)).sum::<f64>()).exp();
            let rhs = eta * psi_norm * xi_norm;
            Ok(Order2Row { a: a.clone(), lhs, eta, rhs, ratio: lhs / rhs })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(Order2Check { rows, max_ratio, p_order, zeta_order, psi_norm, xi_norm })
}

/// Cartesian product of per-factor time lists.
pub fn product_grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![vec![]], |acc, axis| {
        acc.iter()
            .flat_map(|p| {
                axis.iter().map(move |&s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect()
    })
}
