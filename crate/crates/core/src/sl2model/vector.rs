use std::sync::Arc;

use num_complex::Complex64;

use super::grid::SpectralGrid;
use super::profile::Profile;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Complex values on a spectral grid, optionally backed by a closed-form profile.
#[derive(Debug, Clone)]
pub struct ModelVector {
    pub grid: Arc<SpectralGrid>,
    pub values: Vec<Complex64>,
    pub profile: Option<Profile>,
}

impl ModelVector {
    pub fn zeros(grid: Arc<SpectralGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![ZERO; n], profile: None }
    }

    pub fn from_fn(grid: Arc<SpectralGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes.iter().map(|&l| f(l)).collect();
        Self { grid, values, profile: None }
    }

    pub fn from_profile(grid: Arc<SpectralGrid>, profile: Profile) -> Self {
        let half = profile.half_line || !grid.full_line;
        let profile = profile.on_half_line(half);
        let values = grid.nodes.iter().map(|&l| profile.eval(l)).collect();
        Self { grid, values, profile: Some(profile) }
    }

    pub fn with_values(&self, values: Vec<Complex64>) -> Self {
        Self { grid: self.grid.clone(), values, profile: None }
    }

    pub fn without_profile(&self) -> Self {
        self.with_values(self.values.clone())
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.norm_sq(&self.values)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inner(&self, other: &ModelVector) -> Complex64 {
        self.grid.inner(&self.values, &other.values)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            profile: self.profile.as_ref().map(|p| p.scale(c)),
        }
    }

    pub fn add(&self, other: &ModelVector) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let profile = match (&self.profile, &other.profile) {
            (Some(a), Some(b)) => Some(a.add(b)),
            _ => None,
        };
        Self { grid: self.grid.clone(), values, profile }
    }

    /// Pointwise multiplication by a function of λ; the profile is dropped.
    pub fn multiply(&self, m: impl Fn(f64) -> f64) -> Self {
        let values = self
            .grid
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(&l, v)| v * m(l))
            .collect();
        self.with_values(values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &ModelVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Value at an arbitrary λ: exact for profiles, otherwise cubic interpolation in
    /// u = ln|λ|, power-law extrapolation below the grid and zero beyond it.
    pub fn sample(&self, lambda: f64) -> Complex64 {
        if let Some(p) = &self.profile {
            return p.eval(lambda);
        }
        let g = &self.grid;
        if lambda == 0.0 || (!g.full_line && lambda < 0.0) {
            return ZERO;
        }
        let sign = lambda.signum();
        let m = g.branch_len();
        let x = (lambda.abs() / g.config.lambda_min).ln() / g.h;
        let at = |k: usize| self.values[g.index(sign, k)];
        if x > (m - 1) as f64 + 1e-9 {
            return ZERO;
        }
        if x < 0.0 {
            let f0 = at(0);
            if f0 == ZERO || m < 2 {
                return f0;
            }
            let p = ((at(1).norm() / f0.norm()).ln() / g.h).clamp(-5.0, 10.0);
            return f0 * (p * x * g.h).exp();
        }
        if m < 4 {
            let k = (x.floor() as usize).min(m.saturating_sub(2));
            let t = x - k as f64;
            return at(k) * (1.0 - t) + at((k + 1).min(m - 1)) * t;
        }
        let k0 = (x.floor() as isize - 1).clamp(0, m as isize - 4) as usize;
        let t = x - k0 as f64;
        let mut acc = ZERO;
        for j in 0..4 {
            let mut w = 1.0;
            for i in 0..4 {
                if i != j {
                    w *= (t - i as f64) / (j as f64 - i as f64);
                }
            }
            acc += at(k0 + j) * w;
        }
        acc
    }
}
