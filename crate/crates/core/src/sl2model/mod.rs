//! Discretized Fourier model of the irreducible unitary representations of SL(2,R).
//!
//! Vectors live on |λ|-geometric grids with the weight |λ|^{-Re ϖ} (normalizing
//! constant 1). U acts by -iλ, X by (ϖ-1) - 2λ d/dλ, V by i((ϖ-1) d/dλ - λ d²/dλ²),
//! the geodesic flow by f ↦ e^{(ϖ-1)s} f(e^{-2s}λ) and the horocycle flow by e^{-iλt}.
//! In this model [X, U] = -2U and U∘flow(s) = e^{2s} flow(s)∘U.

pub mod grid;
pub mod irrep;
pub mod profile;
pub mod vector;

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use grid::{GridConfig, SpectralGrid};
pub use irrep::{IrrepParams, Series};
pub use profile::Profile;
pub use vector::ModelVector;

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Coarsest u-step accepted by the finite-difference stencils.
pub const MAX_STENCIL_STEP: f64 = 0.2;

/// Subcells per grid cell in the oscillatory quadrature.
const FILON_SUBDIVISION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "time")]
pub enum Flow {
    Geodesic(f64),
    Horocycle(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    X,
    U,
    V,
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Generator::X),
            "U" | "u" => Ok(Generator::U),
            "V" | "v" => Ok(Generator::V),
            other => Err(Error::Configuration(format!("unknown generator `{other}`"))),
        }
    }
}

pub fn make_irrep(series: Series, param: f64) -> Result<IrrepParams> {
    IrrepParams::make(series, param)
}

/// Test profile with the slowest decay the representation allows: a centered
/// Gaussian, multiplied by λ^{n-1} on the discrete series.
pub fn slow_profile(irrep: &IrrepParams) -> Profile {
    match irrep.series {
        Series::Discrete => Profile::power_gaussian(irrep.n - 1, 1.0, 0.0).on_half_line(true),
        Series::Mock => Profile::gaussian(1.0, 0.0).on_half_line(true),
        _ => Profile::gaussian(1.0, 0.0),
    }
}

pub fn make_grid(config: GridConfig, irrep: &IrrepParams) -> Result<Arc<SpectralGrid>> {
    Ok(Arc::new(SpectralGrid::new(config, irrep)?))
}

pub fn weighted_norm(f: &ModelVector, irrep: &IrrepParams) -> Result<f64> {
    f.grid.check_irrep(irrep)?;
    Ok(f.norm())
}

#[derive(Debug, Clone)]
pub struct FlowOutput {
    pub vector: ModelVector,
    /// Relative share of ‖f‖² not represented on the grid after the flow.
    pub loss: f64,
}

pub fn flow_apply(f: &ModelVector, flow: Flow, irrep: &IrrepParams) -> Result<FlowOutput> {
    f.grid.check_irrep(irrep)?;
    match flow {
        Flow::Horocycle(t) => {
            let values = f
                .grid
                .nodes
                .iter()
                .zip(&f.values)
                .map(|(&l, v)| v * Complex64::new(0.0, -l * t).exp())
                .collect();
            Ok(FlowOutput { vector: f.with_values(values), loss: 0.0 })
        }
        Flow::Geodesic(s) => {
            if s == 0.0 {
                return Ok(FlowOutput { vector: f.clone(), loss: 0.0 });
            }
            let vector = match &f.profile {
                Some(p) => ModelVector::from_profile(f.grid.clone(), p.geodesic(s, irrep.varpi)),
                None => {
                    let c = ((irrep.varpi - 1.0) * s).exp();
                    let d = (-2.0 * s).exp();
                    let values = f.grid.nodes.iter().map(|&l| f.sample(d * l) * c).collect();
                    f.with_values(values)
                }
            };
            let before = f.norm_sq();
            let loss = if before > 0.0 { (1.0 - vector.norm_sq() / before).max(0.0) } else { 0.0 };
            Ok(FlowOutput { vector, loss })
        }
    }
}

/// Like [`flow_apply`] but fails when the loss exceeds `budget`.
pub fn flow_apply_checked(f: &ModelVector, flow: Flow, irrep: &IrrepParams, budget: f64) -> Result<ModelVector> {
    let out = flow_apply(f, flow, irrep)?;
    if out.loss > budget {
        return Err(Error::Truncation {
            message: format!("flow {flow:?} lost {:.3e} of the norm beyond the grid", out.loss),
            last_reliable: None,
        });
    }
    Ok(out.vector)
}

/// Finite-difference weights for the derivative of order `m` at `x0` (Fornberg).
fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// First and second u-derivatives on one branch, fourth order, one-sided at the ends.
fn branch_derivatives(vals: &[Complex64], h: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let m = vals.len();
    let mut d1 = vec![Complex64::new(0.0, 0.0); m];
    let mut d2 = d1.clone();
    let mut cache: HashMap<usize, (Vec<f64>, Vec<f64>)> = HashMap::new();
    for k in 0..m {
        let start = k.saturating_sub(2).min(m - 6);
        let off = k - start;
        let (w1, w2) = cache.entry(off).or_insert_with(|| {
            let xs: Vec<f64> = (0..6).map(|i| i as f64).collect();
            (fd_weights(off as f64, &xs, 1), fd_weights(off as f64, &xs, 2))
        });
        for i in 0..6 {
            d1[k] += vals[start + i] * w1[i];
            d2[k] += vals[start + i] * w2[i];
        }
        d1[k] /= h;
        d2[k] /= h * h;
    }
    (d1, d2)
}

pub fn apply_generator(f: &ModelVector, gen: Generator, irrep: &IrrepParams) -> Result<ModelVector> {
    f.grid.check_irrep(irrep)?;
    let g = &f.grid;
    if gen == Generator::U {
        let values = g.nodes.iter().zip(&f.values).map(|(&l, v)| v * (-I * l)).collect();
        let profile = f.profile.as_ref().map(|p| p.apply_u());
        return Ok(ModelVector { grid: g.clone(), values, profile });
    }
    if let Some(p) = &f.profile {
        let q = match gen {
            Generator::X => p.apply_x(irrep.varpi),
            _ => p.apply_v(irrep.varpi),
        };
        return Ok(ModelVector::from_profile(g.clone(), q));
    }
    if g.h > MAX_STENCIL_STEP || g.branch_len() < 6 {
        return Err(Error::Resolution(format!(
            "u-step {:.3} too coarse for the derivative stencil (max {MAX_STENCIL_STEP})",
            g.h
        )));
    }
    let varpi = irrep.varpi;
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    for &s in g.signs() {
        let vals = g.branch_values(&f.values, s);
        let (d1, d2) = branch_derivatives(&vals, g.h);
        for k in 0..vals.len() {
            let lambda = s * g.branch[k];
            out[g.index(s, k)] = match gen {
                Generator::X => vals[k] * (varpi - 1.0) - d1[k] * 2.0,
                _ => I * (d1[k] * varpi - d2[k]) / lambda,
            };
        }
    }
    Ok(f.with_values(out))
}

/// Σ = I - X² - V² applied `m` times.
pub fn apply_sigma(f: &ModelVector, m: usize, irrep: &IrrepParams) -> Result<ModelVector> {
    if m > 1 && f.profile.is_none() {
        return Err(Error::Resolution("powers of I - X² - V² need a closed-form profile".into()));
    }
    let mut cur = f.clone();
    for _ in 0..m {
        let x2 = apply_generator(&apply_generator(&cur, Generator::X, irrep)?, Generator::X, irrep)?;
        let v2 = apply_generator(&apply_generator(&cur, Generator::V, irrep)?, Generator::V, irrep)?;
        cur = cur.add(&x2.scale(Complex64::new(-1.0, 0.0))).add(&v2.scale(Complex64::new(-1.0, 0.0)));
    }
    Ok(cur)
}

/// Norms ‖w f‖ for every generator word w of length ≤ `order`, listed level by level.
pub fn word_norms(f: &ModelVector, generators: &[Generator], order: usize, irrep: &IrrepParams) -> Result<Vec<Vec<f64>>> {
    if f.profile.is_none() && order > 2 {
        return Err(Error::Resolution(format!(
            "order {order} exceeds the finite-difference capacity 2 of a grid-only vector"
        )));
    }
    let mut levels = vec![vec![f.norm()]];
    let mut frontier = vec![f.clone()];
    for _ in 0..order {
        let mut next = Vec::with_capacity(frontier.len() * generators.len());
        for v in &frontier {
            for &g in generators {
                next.push(apply_generator(v, g, irrep)?);
            }
        }
        levels.push(next.iter().map(|v| v.norm()).collect());
        frontier = next;
    }
    Ok(levels)
}

/// (Σ_{|w| ≤ order} ‖w f‖²)^{1/2} over words in `generators`.
pub fn sobolev_norm(f: &ModelVector, generators: &[Generator], order: usize, irrep: &IrrepParams) -> Result<f64> {
    f.grid.check_irrep(irrep)?;
    let levels = word_norms(f, generators, order, irrep)?;
    Ok(levels.iter().flatten().map(|n| n * n).sum::<f64>().sqrt())
}

/// ∫_0^1 e^{-iθx} dx and ∫_0^1 x e^{-iθx} dx.
fn filon_moments(theta: f64) -> (Complex64, Complex64) {
    if theta.abs() < 0.5 {
        let z = Complex64::new(0.0, -theta);
        let mut term = Complex64::new(1.0, 0.0);
        let mut i0 = Complex64::new(0.0, 0.0);
        let mut i1 = Complex64::new(0.0, 0.0);
        let mut fact = 1.0;
        for n in 0..16 {
            if n > 0 {
                term *= z;
                fact *= n as f64;
            }
            i0 += term / (fact * (n + 1) as f64);
            i1 += term / (fact * (n + 2) as f64);
        }
        (i0, i1)
    } else {
        let e = Complex64::new(0.0, -theta).exp();
        let i0 = (Complex64::new(1.0, 0.0) - e) / (I * theta);
        let i1 = e * (I / theta + 1.0 / (theta * theta)) - 1.0 / (theta * theta);
        (i0, i1)
    }
}

/// ∫ e^{-iλt} F(λ) dλ over [a, b] with F linear between its end values.
fn filon_cell(a: f64, b: f64, fa: Complex64, fb: Complex64, t: f64) -> Complex64 {
    let h = b - a;
    let (i0, i1) = filon_moments(t * h);
    Complex64::new(0.0, -a * t).exp() * h * (fa * i0 + (fb - fa) * i1)
}

/// ∫ e^{-iλt} f(λ) conj g(λ) |λ|^{-ρ} dλ by linear Filon on subdivided cells.
fn horocycle_coefficient(f: &ModelVector, g: &ModelVector, t: f64) -> Complex64 {
    let grid = &f.grid;
    let rho = grid.rho;
    let dens = |l: f64| f.sample(l) * g.sample(l).conj() * l.abs().powf(-rho);
    let mut acc = Complex64::new(0.0, 0.0);
    for &s in grid.signs() {
        let m = grid.branch_len();
        let mut prev_l = s * grid.branch[0];
        let mut prev = dens(prev_l);
        for k in 0..m - 1 {
            for j in 1..=FILON_SUBDIVISION {
                let l = s * grid.branch[k] * (grid.h * j as f64 / FILON_SUBDIVISION as f64).exp();
                let cur = dens(l);
                acc += if s > 0.0 {
                    filon_cell(prev_l, l, prev, cur, t)
                } else {
                    filon_cell(l, prev_l, cur, prev, t)
                };
                prev_l = l;
                prev = cur;
            }
        }
        let l0 = grid.branch[0];
        let d0 = dens(s * l0) * l0;
        let d1 = dens(s * grid.branch[1]) * grid.branch[1];
        if let Some(tail) = grid.inner_tail(d0, d1) {
            acc += tail;
        }
    }
    acc
}

/// ⟨flow(f), g⟩ under the model inner product.
pub fn matrix_coefficient(f: &ModelVector, g: &ModelVector, flow: Flow, irrep: &IrrepParams) -> Result<Complex64> {
    f.grid.check_irrep(irrep)?;
    if !Arc::ptr_eq(&f.grid, &g.grid) && *f.grid != *g.grid {
        return Err(Error::Domain("vectors live on different grids".into()));
    }
    match flow {
        Flow::Horocycle(t) if t != 0.0 => Ok(horocycle_coefficient(f, g, t)),
        Flow::Horocycle(_) => Ok(f.inner(g)),
        Flow::Geodesic(_) => Ok(flow_apply(f, flow, irrep)?.vector.inner(g)),
    }
}
