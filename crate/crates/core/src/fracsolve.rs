//! Fractional multipliers |U|^r, cohomological solvers and their sharpness diagnostics.
//!
//! Solvability of |U|^r ω = ξ is decided from the power law of the u-density
//! |ω|² |λ|^{1-Re ϖ} over the innermost three decades of the grid: a nonpositive
//! exponent means the norm of ω diverges at λ = 0.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::sl2model::{flow_apply, Flow, IrrepParams, ModelVector};

/// Tail exponents at or below this value are read as divergence.
pub const DIVERGENCE_KAPPA: f64 = 0.005;

/// Decades at the inner end used for the verdict.
pub const VERDICT_DECADES: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Solvable,
    Divergent,
    Obstructed,
}

/// f(t) = 1 on |t| ≤ s, 0 on |t| ≥ 2s, quintic smoothstep in between (C²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub scale: f64,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

impl CutoffProfile {
    pub fn eval(&self, t: f64) -> f64 {
        let x = t.abs() / self.scale - 1.0;
        if x <= 0.0 {
            1.0
        } else if x >= 1.0 {
            0.0
        } else {
            1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: Option<ModelVector>,
    /// `None` when the norm is infinite.
    pub solution_norm: Option<f64>,
    pub verdict: Verdict,
    /// Power-law exponent of the solution's u-density near λ = 0.
    pub tail_slope: f64,
    /// max(0, -tail_slope).
    pub divergence_exponent: f64,
    /// (inner cutoff, norm of the solution restricted to |λ| ≥ cutoff).
    pub partial_norms: Vec<(f64, f64)>,
}

impl SolveReport {
    pub fn is_solvable(&self) -> bool {
        self.verdict == Verdict::Solvable
    }
}

/// Least-squares power-law exponent of |ω|² |λ|^{1-ρ} over the inner decades,
/// minimized over branches. Infinite when ω vanishes there.
pub fn tail_slope(omega: &ModelVector) -> Result<f64> {
    let g = &omega.grid;
    if g.config.decades() < VERDICT_DECADES + 1.0 {
        return Err(Error::Resolution(format!(
            "grid spans {:.1} decades; the verdict needs at least {}",
            g.config.decades(),
            VERDICT_DECADES + 1.0
        )));
    }
    let upper = g.config.lambda_min * 10f64.powf(VERDICT_DECADES);
    let mut kappa = f64::INFINITY;
    for &s in g.signs() {
        let mut pts = Vec::new();
        for (k, &l) in g.branch.iter().enumerate().take_while(|(_, &l)| l <= upper) {
            let d = omega.values[g.index(s, k)].norm_sqr() * l.powf(1.0 - g.rho);
            if d > 0.0 && d.is_finite() {
                pts.push((l.ln(), d.ln()));
            } else {
                pts.clear();
                break;
            }
        }
        if pts.len() < 5 {
            continue;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        kappa = kappa.min(sxy / sxx);
    }
    Ok(kappa)
}

fn partial_norms(omega: &ModelVector) -> Vec<(f64, f64)> {
    let g = &omega.grid;
    let decades = g.config.decades().floor() as i32;
    (0..=decades)
        .map(|j| {
            let cut = g.config.lambda_min * 10f64.powi(j);
            let sum: f64 = g
                .nodes
                .iter()
                .zip(&g.weights)
                .zip(&omega.values)
                .filter(|((l, _), _)| l.abs() >= cut * (1.0 - 1e-12))
                .map(|((_, w), v)| w * v.norm_sqr())
                .sum();
            (cut, sum.sqrt())
        })
        .collect()
}

fn report(omega: ModelVector, fail: Verdict) -> Result<SolveReport> {
    let kappa = tail_slope(&omega)?;
    let ok = kappa > DIVERGENCE_KAPPA;
    Ok(SolveReport {
        solution_norm: ok.then(|| omega.norm()),
        verdict: if ok { Verdict::Solvable } else { fail },
        tail_slope: kappa,
        divergence_exponent: (-kappa).max(0.0),
        partial_norms: partial_norms(&omega),
        solution: Some(omega),
    })
}

/// Multiplication by |λ|^r, the spectral multiplier of |U|^r.
pub fn frac_apply(f: &ModelVector, r: f64) -> Result<ModelVector> {
    if !(r >= 0.0 && r.is_finite()) {
        return domain(format!("fractional order must be nonnegative, got {r}"));
    }
    if r == 0.0 {
        return Ok(f.clone());
    }
    Ok(f.multiply(|l| l.abs().powf(r)))
}

/// Candidate ω = ξ/|λ|^r with a convergence verdict.
pub fn frac_solve(xi: &ModelVector, r: f64, irrep: &IrrepParams) -> Result<SolveReport> {
    xi.grid.check_irrep(irrep)?;
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("fractional order must be positive, got {r}"));
    }
    report(xi.multiply(|l| l.abs().powf(-r)), Verdict::Divergent)
}

/// Candidate ω = ξ/(-iλ) for U ω = ξ; obstructed when ω has infinite norm.
pub fn classical_solve(xi: &ModelVector, irrep: &IrrepParams) -> Result<SolveReport> {
    xi.grid.check_irrep(irrep)?;
    let values = xi
        .grid
        .nodes
        .iter()
        .zip(&xi.values)
        .map(|(&l, v)| v * Complex64::new(0.0, 1.0 / l))
        .collect();
    report(xi.with_values(values), Verdict::Obstructed)
}

pub fn cutoff_apply(psi: &ModelVector, profile: &CutoffProfile) -> ModelVector {
    psi.multiply(|l| profile.eval(l))
}

/// Solves |U|^q ω = ψ - Pψ by ω = (1-f)ψ/|λ|^q; always solvable.
pub fn highpass_frac_solve(psi: &ModelVector, q: f64, profile: &CutoffProfile) -> Result<SolveReport> {
    if !(q > 0.0 && q.is_finite()) {
        return domain(format!("order must be positive, got {q}"));
    }
    let omega = psi.multiply(|l| (1.0 - profile.eval(l)) * l.abs().powf(-q));
    Ok(SolveReport {
        solution_norm: Some(omega.norm()),
        verdict: Verdict::Solvable,
        tail_slope: f64::INFINITY,
        divergence_exponent: 0.0,
        partial_norms: partial_norms(&omega),
        solution: Some(omega),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanEntry {
    pub r: f64,
    pub verdict: Verdict,
    pub tail_slope: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub entries: Vec<ScanEntry>,
    pub last_solvable: Option<f64>,
    pub first_divergent: Option<f64>,
    /// Midpoint of the bracket.
    pub estimate: Option<f64>,
    /// Width of the bracket.
    pub resolution: Option<f64>,
    /// No divergence anywhere in the scanned range.
    pub unbounded: bool,
    /// Verdicts switch from solvable to divergent at most once.
    pub monotone: bool,
}

pub fn threshold_scan(xi: &ModelVector, irrep: &IrrepParams, r_grid: &[f64]) -> Result<ThresholdScan> {
    if r_grid.is_empty() || r_grid.windows(2).any(|w| w[0] >= w[1]) {
        return domain("r grid must be nonempty and strictly increasing");
    }
    let entries: Vec<ScanEntry> = r_grid
        .par_iter()
        .map(|&r| {
            frac_solve(xi, r, irrep).map(|rep| ScanEntry { r, verdict: rep.verdict, tail_slope: rep.tail_slope })
        })
        .collect::<Result<_>>()?;
    let solvable = |e: &ScanEntry| e.verdict == Verdict::Solvable;
    let first_bad = entries.iter().position(|e| !solvable(e));
    let monotone = match first_bad {
        Some(i) => entries[i..].iter().all(|e| !solvable(e)),
        None => true,
    };
    let (last_solvable, first_divergent) = match first_bad {
        None => (Some(entries.last().unwrap().r), None),
        Some(0) => {
            return Err(Error::Range(format!(
                "no solvable order in the scanned range starting at {}",
                entries[0].r
            )))
        }
        Some(i) => (Some(entries[i - 1].r), Some(entries[i].r)),
    };
    let (estimate, resolution) = match (last_solvable, first_divergent) {
        (Some(a), Some(b)) => (Some(0.5 * (a + b)), Some(b - a)),
        _ => (None, None),
    };
    Ok(ThresholdScan {
        unbounded: first_divergent.is_none(),
        entries,
        last_solvable,
        first_divergent,
        estimate,
        resolution,
        monotone,
    })
}

/// Maximum nodewise deviation between |U|^r ρ(a_s) f and e^{-2rs} ρ(a_s) |U|^r f,
/// where ρ(a_s) is the model flow at time -s. Both sides use grid resampling.
pub fn conjugation_scaling_check(f: &ModelVector, s: f64, r: f64, irrep: &IrrepParams) -> Result<f64> {
    let f = f.without_profile();
    let lhs = frac_apply(&flow_apply(&f, Flow::Geodesic(-s), irrep)?.vector, r)?;
    let rhs = flow_apply(&frac_apply(&f, r)?, Flow::Geodesic(-s), irrep)?
        .vector
        .scale(Complex64::new((-2.0 * r * s).exp(), 0.0));
    Ok(lhs.max_abs_diff(&rhs))
}

/// Even test densities for the Tauberian identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TauProfile {
    /// exp(-λ²/(2σ²)).
    Gaussian { sigma: f64 },
    /// (1 - (λ/w)²)^4 on |λ| < w.
    SquaredBump { width: f64 },
}

impl TauProfile {
    pub fn eval(&self, l: f64) -> f64 {
        match *self {
            TauProfile::Gaussian { sigma } => (-0.5 * (l / sigma).powi(2)).exp(),
            TauProfile::SquaredBump { width } => {
                let x = l / width;
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - x * x).powi(4)
                }
            }
        }
    }

    /// Half-width beyond which τ is negligible or zero.
    fn support(&self) -> f64 {
        match *self {
            TauProfile::Gaussian { sigma } => 9.0 * sigma,
            TauProfile::SquaredBump { width } => width,
        }
    }

    fn validate(&self) -> Result<()> {
        let p = match *self {
            TauProfile::Gaussian { sigma } => sigma,
            TauProfile::SquaredBump { width } => width,
        };
        if !(p > 0.0 && p.is_finite()) {
            return domain("profile scale must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauberianConfig {
    pub tolerance: f64,
    /// Largest |t| integrated; beyond it the tail is bounded, not computed.
    pub t_max: f64,
    /// Oscillatory quadrature switches to Filon beyond this |t|.
    pub filon_from: f64,
    /// Relative budget for the untreated tail.
    pub budget: f64,
}

impl Default for TauberianConfig {
    fn default() -> Self {
        Self { tolerance: 1e-13, t_max: 400.0, filon_from: 50.0, budget: 1e-4 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauberianReport {
    pub r_prime: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
    /// Bound on the neglected |t| > t_max part of the right side.
    pub tail_bound: f64,
    pub t_max: f64,
}

fn de(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, tol).integral
}

/// ∫_a^b f in panels of width at most `w`.
fn panels(f: &impl Fn(f64) -> f64, a: f64, b: f64, w: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = ((b - a) / w).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    (0..n).map(|i| de(f, a + i as f64 * h, a + (i + 1) as f64 * h, tol)).sum()
}

/// τ̂(t) = ∫ τ(λ) e^{-iλt} dλ = 2∫_0^∞ τ(λ) cos(λt) dλ for even τ.
fn tau_hat(tau: &TauProfile, t: f64, cfg: &TauberianConfig) -> f64 {
    let l = tau.support();
    let t = t.abs();
    if t <= cfg.filon_from {
        let w = if t > 0.0 { (std::f64::consts::PI / t).min(1.0) } else { 1.0 };
        2.0 * panels(&|x| tau.eval(x) * (x * t).cos(), 0.0, l, w, cfg.tolerance)
    } else {
        // Linear Filon on a fine mesh, cos part of ∫ e^{-iλt} τ.
        let n = 4000;
        let h = l / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let a = i as f64 * h;
            let fa = tau.eval(a);
            let fb = tau.eval(a + h);
            // ∫_0^h (fa + (fb-fa)x/h) cos(t(a+x)) dx
            let (sa, ca) = (a * t).sin_cos();
            let (sb, cb) = ((a + h) * t).sin_cos();
            let slope = (fb - fa) / h;
            acc += (fb * sb - fa * sa) / t + slope * (cb - ca) / (t * t);
        }
        2.0 * acc
    }
}

/// Compares ∫τ|λ|^{-2r'} with (1/2π)·2Γ(1-2r')sin(πr')·∫τ̂(t)|t|^{2r'-1} dt.
pub fn tauberian_check(tau: &TauProfile, r_prime: f64, cfg: &TauberianConfig) -> Result<TauberianReport> {
    tau.validate()?;
    if !(r_prime > 0.0 && r_prime < 0.5) {
        return domain(format!("r' must lie in (0, 1/2), got {r_prime}"));
    }
    let alpha = 2.0 * r_prime;
    let tol = cfg.tolerance;
    let l = tau.support();

    // Left side: λ = v^{1/(1-α)} on [0,1] removes the endpoint singularity.
    let e = 1.0 / (1.0 - alpha);
    let near = panels(&|v| e * tau.eval(v.powf(e)), 0.0, 1.0f64.min(l), 0.25, tol);
    let far = panels(&|x| tau.eval(x) * x.powf(-alpha), 1.0, l, 0.5, tol);
    let lhs = 2.0 * (near + far);

    // Right side: t = v^{1/α} on [0,1].
    let t_max = match tau {
        TauProfile::Gaussian { sigma } => (12.0 / sigma).min(cfg.t_max),
        TauProfile::SquaredBump { .. } => cfg.t_max,
    };
    let ea = 1.0 / alpha;
    let near_t = panels(&|v| ea * tau_hat(tau, v.powf(ea), cfg), 0.0, 1.0, 0.125, tol);
    let osc = (std::f64::consts::PI / l).min(1.0);
    let far_t = panels(&|t| tau_hat(tau, t, cfg) * t.powf(alpha - 1.0), 1.0, t_max, osc, tol);
    let kernel = 2.0 * statrs::function::gamma::gamma(1.0 - alpha) * (std::f64::consts::PI * r_prime).sin()
        / (2.0 * std::f64::consts::PI);
    let rhs = kernel * 2.0 * (near_t + far_t);

    // The bump's transform decays like t^{-5}; bound the rest from the envelope near t_max.
    let tail_bound = match tau {
        TauProfile::Gaussian { .. } => 0.0,
        TauProfile::SquaredBump { .. } => {
            let env = (0..64)
                .map(|i| tau_hat(tau, t_max - i as f64 * osc / 32.0, cfg).abs())
                .fold(0.0, f64::max);
            kernel.abs() * 2.0 * env * t_max.powf(alpha) / (5.0 - alpha)
        }
    };
    let relative_error = (lhs - rhs).abs() / lhs.abs();
    if tail_bound / lhs.abs() > cfg.budget {
        return Err(Error::Accuracy {
            message: format!("untreated tail beyond |t| = {t_max} exceeds the budget {}", cfg.budget),
            achieved: tail_bound / lhs.abs(),
        });
    }
    Ok(TauberianReport { r_prime, lhs, rhs, relative_error, tail_bound, t_max })
}
