//! Closed-form test vectors: finite sums of p(λ-b)·exp(-a(λ-b)²).
//!
//! The class is stable under U, X, V and the geodesic rescaling, so generator words
//! of any length are evaluated exactly instead of by finite differences.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    /// Coefficients of the polynomial in w = λ - b, lowest degree first.
    pub coeffs: Vec<Complex64>,
    pub a: f64,
    pub b: f64,
}

impl Block {
    fn eval(&self, lambda: f64) -> Complex64 {
        let w = lambda - self.b;
        let g = (-self.a * w * w).exp();
        if g == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let p = self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c);
        p * g
    }

    fn derivative(&self) -> Block {
        let n = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                out[k - 1] += c * k as f64;
            }
            out[k + 1] -= c * (2.0 * self.a);
        }
        Block { coeffs: out, a: self.a, b: self.b }
    }

    fn mul_lambda(&self) -> Block {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k + 1] += c;
            out[k] += c * self.b;
        }
        Block { coeffs: out, a: self.a, b: self.b }
    }

    fn scaled(&self, c: Complex64) -> Block {
        Block {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            a: self.a,
            b: self.b,
        }
    }

    /// λ ↦ f(cλ), c > 0.
    fn dilate(&self, c: f64) -> Block {
        let mut pow = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|x| {
                let y = x * pow;
                pow *= c;
                y
            })
            .collect();
        Block { coeffs, a: self.a * c * c, b: self.b / c }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub blocks: Vec<Block>,
    /// Restrict to λ > 0.
    pub half_line: bool,
}

impl Profile {
    /// exp(-a(λ-b)²).
    pub fn gaussian(a: f64, b: f64) -> Self {
        Self::power_gaussian(0, a, b)
    }

    /// λ^k exp(-a(λ-b)²).
    pub fn power_gaussian(k: u32, a: f64, b: f64) -> Self {
        // λ^k = (w + b)^k expanded binomially.
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k as usize + 1];
        let mut binom = 1.0;
        for j in 0..=k as usize {
            coeffs[j] = Complex64::new(binom * b.powi((k as usize - j) as i32), 0.0);
            binom = binom * (k as usize - j) as f64 / (j + 1) as f64;
        }
        Self {
            blocks: vec![Block { coeffs, a, b }],
            half_line: false,
        }
    }

    pub fn on_half_line(mut self, half: bool) -> Self {
        self.half_line = half;
        self
    }

    pub fn eval(&self, lambda: f64) -> Complex64 {
        if self.half_line && lambda <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.blocks.iter().map(|b| b.eval(lambda)).sum()
    }

    fn map(&self, f: impl Fn(&Block) -> Block) -> Self {
        Self {
            blocks: self.blocks.iter().map(f).collect(),
            half_line: self.half_line,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|b| b.scaled(c))
    }

    pub fn add(&self, other: &Profile) -> Self {
        let mut blocks = self.blocks.clone();
        for ob in &other.blocks {
            if let Some(b) = blocks.iter_mut().find(|b| b.a == ob.a && b.b == ob.b) {
                if b.coeffs.len() < ob.coeffs.len() {
                    b.coeffs.resize(ob.coeffs.len(), Complex64::new(0.0, 0.0));
                }
                for (x, y) in b.coeffs.iter_mut().zip(&ob.coeffs) {
                    *x += y;
                }
            } else {
                blocks.push(ob.clone());
            }
        }
        Self { blocks, half_line: self.half_line && other.half_line }
    }

    pub fn derivative(&self) -> Self {
        self.map(Block::derivative)
    }

    pub fn mul_lambda(&self) -> Self {
        self.map(Block::mul_lambda)
    }

    pub fn dilate(&self, c: f64) -> Self {
        self.map(|b| b.dilate(c))
    }

    /// U f = -iλ f.
    pub fn apply_u(&self) -> Self {
        self.mul_lambda().scale(-I)
    }

    /// X f = (ϖ-1) f - 2λ f'.
    pub fn apply_x(&self, varpi: Complex64) -> Self {
        self.scale(varpi - 1.0)
            .add(&self.derivative().mul_lambda().scale(Complex64::new(-2.0, 0.0)))
    }

    /// V f = i((ϖ-1) f' - λ f'').
    pub fn apply_v(&self, varpi: Complex64) -> Self {
        let d = self.derivative();
        d.scale(I * (varpi - 1.0))
            .add(&d.derivative().mul_lambda().scale(-I))
    }

    /// e^{(ϖ-1)s} f(e^{-2s} λ).
    pub fn geodesic(&self, s: f64, varpi: Complex64) -> Self {
        self.dilate((-2.0 * s).exp()).scale(((varpi - 1.0) * s).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol * (1.0 + b.norm()), "{a} vs {b}");
    }

    #[test]
    fn power_gaussian_values() {
        let p = Profile::power_gaussian(3, 0.7, 1.3);
        for &l in &[-1.0, 0.0, 0.4, 2.5] {
            let want = l * l * l * (-0.7 * (l - 1.3f64).powi(2)).exp();
            close(p.eval(l), Complex64::new(want, 0.0), 1e-13);
        }
        let h = Profile::gaussian(1.0, 0.0).on_half_line(true);
        assert_eq!(h.eval(-0.5), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let p = Profile::power_gaussian(2, 0.5, 0.8);
        let d = p.derivative();
        for &l in &[0.1, 1.0, 3.0] {
            let e = 1e-6;
            let fd = (p.eval(l + e) - p.eval(l - e)) / (2.0 * e);
            close(d.eval(l), fd, 1e-7);
        }
    }

    #[test]
    fn generators_match_formulas() {
        let varpi = Complex64::new(0.5, 0.0);
        let p = Profile::gaussian(1.0, 0.3);
        let f = |l: f64| (-(l - 0.3f64).powi(2)).exp();
        let f1 = |l: f64| -2.0 * (l - 0.3) * f(l);
        let f2 = |l: f64| (4.0 * (l - 0.3f64).powi(2) - 2.0) * f(l);
        for &l in &[-0.7, 0.2, 1.5] {
            close(p.apply_u().eval(l), Complex64::new(0.0, -l * f(l)), 1e-13);
            close(p.apply_x(varpi).eval(l), Complex64::new(-0.5 * f(l) - 2.0 * l * f1(l), 0.0), 1e-13);
            close(p.apply_v(varpi).eval(l), Complex64::new(0.0, -0.5 * f1(l) - l * f2(l)), 1e-13);
        }
    }

    #[test]
    fn geodesic_is_a_flow() {
        let varpi = Complex64::new(0.3, 0.0);
        let p = Profile::power_gaussian(1, 2.0, 0.5);
        let a = p.geodesic(0.4, varpi).geodesic(-0.15, varpi);
        let b = p.geodesic(0.25, varpi);
        for &l in &[0.05, 0.5, 2.0] {
            close(a.eval(l), b.eval(l), 1e-12);
        }
        let expect = (0.25 * (0.3 - 1.0f64)).exp() * p.eval((-0.5f64).exp() * 1.1).re;
        assert_relative_eq!(b.eval(1.1).re, expect, max_relative = 1e-12);
    }
}
