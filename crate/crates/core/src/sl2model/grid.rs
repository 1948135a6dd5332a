use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::irrep::IrrepParams;
use crate::error::{domain, Error, Result};

/// Largest number of nodes allowed on one half-line.
pub const MAX_BRANCH_NODES: usize = 200_000;

/// Tail exponents below this are treated as non-integrable.
pub(crate) const TAIL_KAPPA_MIN: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Ratio between consecutive nodes.
    pub ratio: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lambda_min: 1e-6,
            lambda_max: 1e3,
            ratio: 1.05,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min > 0.0 && self.lambda_max > self.lambda_min && self.lambda_max.is_finite()) {
            return Err(Error::Configuration(format!(
                "need 0 < lambda_min < lambda_max, got {} and {}",
                self.lambda_min, self.lambda_max
            )));
        }
        if !(self.ratio > 1.0 && self.ratio.is_finite()) {
            return Err(Error::Configuration(format!("node ratio must exceed 1, got {}", self.ratio)));
        }
        Ok(())
    }

    /// Doubles the node density and halves the inner cutoff.
    pub fn refined(&self) -> Self {
        Self {
            lambda_min: self.lambda_min / 2.0,
            lambda_max: self.lambda_max,
            ratio: self.ratio.sqrt(),
        }
    }

    pub fn refined_times(&self, times: usize) -> Self {
        (0..times).fold(*self, |c, _| c.refined())
    }

    /// Decades covered by the grid.
    pub fn decades(&self) -> f64 {
        (self.lambda_max / self.lambda_min).log10()
    }
}

/// Geometric grid on one or both half-lines, with trapezoid weights in u = ln|λ|
/// for the measure |λ|^{-ρ} dλ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub config: GridConfig,
    pub full_line: bool,
    /// Re ϖ of the weight.
    pub rho: f64,
    /// Step in u.
    pub h: f64,
    /// Positive branch nodes λ_0 < λ_1 < ...
    pub branch: Vec<f64>,
    /// All nodes, strictly increasing.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(config: GridConfig, irrep: &IrrepParams) -> Result<Self> {
        config.validate()?;
        let span = (config.lambda_max / config.lambda_min).ln();
        let steps = (span / config.ratio.ln()).ceil().max(1.0);
        if steps as usize + 1 > MAX_BRANCH_NODES {
            return Err(Error::Capacity(format!("{} nodes per branch exceed {MAX_BRANCH_NODES}", steps as usize + 1)));
        }
        let m = steps as usize + 1;
        let h = span / steps;
        let rho = irrep.rho();
        let branch: Vec<f64> = (0..m).map(|k| config.lambda_min * (k as f64 * h).exp()).collect();
        let bw: Vec<f64> = branch
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                let end = if k == 0 || k == m - 1 { 0.5 } else { 1.0 };
                end * h * l.powf(1.0 - rho)
            })
            .collect();
        let full_line = !irrep.half_line();
        let (nodes, weights) = if full_line {
            let mut nodes: Vec<f64> = branch.iter().rev().map(|l| -l).collect();
            nodes.extend(&branch);
            let mut weights: Vec<f64> = bw.iter().rev().copied().collect();
            weights.extend(&bw);
            (nodes, weights)
        } else {
            (branch.clone(), bw)
        };
        Ok(Self {
            config,
            full_line,
            rho,
            h,
            branch,
            nodes,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn branch_len(&self) -> usize {
        self.branch.len()
    }

    /// Signs of the branches present: `[1]` or `[1, -1]`.
    pub fn signs(&self) -> &'static [f64] {
        if self.full_line {
            &[1.0, -1.0]
        } else {
            &[1.0]
        }
    }

    /// Storage index of the node sign·λ_k.
    pub fn index(&self, sign: f64, k: usize) -> usize {
        let m = self.branch.len();
        if !self.full_line {
            k
        } else if sign > 0.0 {
            m + k
        } else {
            m - 1 - k
        }
    }

    /// Values of one branch, ordered by increasing |λ|.
    pub fn branch_values(&self, values: &[Complex64], sign: f64) -> Vec<Complex64> {
        (0..self.branch.len()).map(|k| values[self.index(sign, k)]).collect()
    }

    pub fn check_irrep(&self, irrep: &IrrepParams) -> Result<()> {
        if self.full_line == irrep.half_line() || (self.rho - irrep.rho()).abs() > 1e-12 {
            return domain(format!("grid (full line {}, rho {}) does not carry {:?}", self.full_line, self.rho, irrep.series));
        }
        Ok(())
    }

    /// ∫_0^{λ_0} of a density whose u-density at the two innermost nodes is `d0`, `d1`,
    /// extrapolated as a power law. `None` when the extrapolated tail is not integrable.
    pub(crate) fn inner_tail(&self, d0: Complex64, d1: Complex64) -> Option<Complex64> {
        let (a0, a1) = (d0.norm(), d1.norm());
        if a0 == 0.0 {
            return Some(Complex64::new(0.0, 0.0));
        }
        if a1 == 0.0 {
            return Some(Complex64::new(0.0, 0.0));
        }
        let kappa = (a1 / a0).ln() / self.h;
        (kappa > TAIL_KAPPA_MIN).then(|| d0 / kappa)
    }

    /// Weighted inner product Σ w f ḡ plus the power-law inner tails.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        let mut acc: Complex64 = self
            .weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| a * b.conj() * *w)
            .sum();
        for &s in self.signs() {
            let dens = |k: usize| {
                let i = self.index(s, k);
                f[i] * g[i].conj() * self.branch[k].powf(1.0 - self.rho)
            };
            if self.branch.len() > 1 {
                if let Some(t) = self.inner_tail(dens(0), dens(1)) {
                    acc += t;
                }
            }
        }
        acc
    }

    pub fn norm_sq(&self, f: &[Complex64]) -> f64 {
        self.inner(f, f).re.max(0.0)
    }
}
