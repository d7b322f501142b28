//! Rescaled limits, their mass formulas and Yamabe-type classification.
//!
//! A conformal factor `f` on the reduced coordinate describes the limit metric
//! `e^{2f} σ_K`. Derivatives here use fourth-order stencils.

use std::fmt;

use crate::ambient::{AmbientSpace, FieldKind};
use crate::error::{HypflowError, Result};
use crate::flow::FlowState;
use crate::grid::{d1, d2, ReducedGrid, StencilOrder};

use super::trajectory::Trajectory;

const LIMIT_ORDER: StencilOrder = StencilOrder::Fourth;

fn check_len(grid: &ReducedGrid, f: &[f64]) -> Result<()> {
    if f.len() != grid.nodes() {
        return Err(HypflowError::Precondition(format!("{} values for {} nodes", f.len(), grid.nodes())));
    }
    Ok(())
}

/// `(s-derivative, s-second derivative, tangential term)` of `w`.
fn reduced_derivatives(grid: &ReducedGrid, w: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let c = grid.scale();
    let wt = d1(w, grid.h(), LIMIT_ORDER);
    let wtt = d2(w, grid.h(), LIMIT_ORDER);
    let tang = grid.tangential(&wt, &wtt);
    let ws = wt.iter().map(|x| x / c).collect();
    let wss = wtt.iter().map(|x| x / (c * c)).collect();
    (ws, wss, tang)
}

/// `(∫ e^{mf})^{-1+4/m} ∫ e^{(m-2)f} |∇̊² e^{-f}|²` over `(S^m, σ)`, `K = R`.
pub fn hawking_mass_limit(grid: &ReducedGrid, f: &[f64]) -> Result<f64> {
    check_len(grid, f)?;
    let amb = grid.amb();
    if amb.field() != FieldKind::R {
        return Err(HypflowError::WrongField(format!("the Hawking limit is defined for K = R, got {amb}")));
    }
    let m = amb.m() as f64;
    let w: Vec<f64> = f.iter().map(|x| (-x).exp()).collect();
    let (_, wss, tang) = reduced_derivatives(grid, &w);
    let vol: Vec<f64> = f.iter().map(|x| (m * x).exp()).collect();
    let integrand: Vec<f64> = (0..f.len())
        .map(|j| {
            let d = wss[j] - tang[j];
            ((m - 2.0) * f[j]).exp() * (m - 1.0) / m * d * d
        })
        .collect();
    Ok(grid.integrate(&vol).powf(-1.0 + 4.0 / m) * grid.integrate(&integrand))
}

/// `(∫ e^{kf})^{-1+2/k} ∫ e^{kf} (w Δw - (k/2)|∇w|²)`, `w = e^{-f}`, `k = m + a`.
pub fn by_mass_limit(grid: &ReducedGrid, f: &[f64]) -> Result<f64> {
    check_len(grid, f)?;
    let amb = grid.amb();
    let k = amb.horosphere_mean_curvature();
    let b1 = (grid.base_dim() - 1) as f64;
    let w: Vec<f64> = f.iter().map(|x| (-x).exp()).collect();
    let (ws, wss, tang) = reduced_derivatives(grid, &w);
    let vol: Vec<f64> = f.iter().map(|x| (k * x).exp()).collect();
    let integrand: Vec<f64> = (0..f.len())
        .map(|j| {
            let lap = wss[j] + b1 * tang[j];
            vol[j] * (w[j] * lap - 0.5 * k * ws[j] * ws[j])
        })
        .collect();
    Ok(grid.integrate(&vol).powf(-1.0 + 2.0 / k) * grid.integrate(&integrand))
}

/// `ρ̃` with `sphere_area(ρ̃) = area`, by safeguarded Newton on the log area.
pub fn area_radius(amb: &AmbientSpace, area: f64) -> Result<f64> {
    if !(area > 0.0 && area.is_finite()) {
        return Err(HypflowError::RootFind(format!("area {area} cannot be matched by a geodesic sphere")));
    }
    let target = area.ln();
    let g = |r: f64| amb.ln_sphere_area(r).map(|x| x - target);
    let (mut lo, mut hi) = (1e-8, 1.0);
    if g(lo)? > 0.0 {
        return Err(HypflowError::RootFind(format!("area {area:e} is below the bracket")));
    }
    while g(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(HypflowError::RootFind(format!("area {area:e} is beyond the bracket")));
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..200 {
        let val = g(r)?;
        if val == 0.0 {
            return Ok(r);
        }
        if val < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        // d/dρ ln(sinh^m cosh^a) = Ĥ(ρ)
        let newton = r - val / amb.hbar(r)?;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - r).abs() <= 1e-15 * r.max(1.0) {
            return Ok(next);
        }
        r = next;
    }
    Err(HypflowError::RootFind("area radius did not converge".into()))
}

/// `f̃ = ρ - ρ̃` for one state.
pub fn rescaled_profile(state: &FlowState) -> Result<(Vec<f64>, f64)> {
    let rho_tilde = area_radius(state.profile.amb(), state.slice.total_area())?;
    Ok((state.profile.rho().iter().map(|r| r - rho_tilde).collect(), rho_tilde))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescaledLimit {
    pub t_final: f64,
    pub f: Vec<f64>,
    pub rho_tilde: f64,
    /// `|M_{t_final}|`; the limit metric is `f̃` up to this normalisation.
    pub area: f64,
    /// `sup |f̃(t_final) - f̃(t_final/2)|`.
    pub cauchy: f64,
}

pub fn rescaled_limit(traj: &Trajectory) -> Result<RescaledLimit> {
    let last = traj
        .final_state()
        .ok_or_else(|| HypflowError::Precondition("trajectory keeps no final state".into()))?;
    let half = traj
        .state_at_or_after(0.5 * last.t)
        .ok_or_else(|| HypflowError::Precondition("trajectory keeps no mid-run state".into()))?;
    let (f, rho_tilde) = rescaled_profile(last)?;
    let (f_half, _) = rescaled_profile(half)?;
    let cauchy = f.iter().zip(&f_half).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(RescaledLimit { t_final: last.t, f, rho_tilde, area: last.slice.total_area(), cauchy })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `K = R`: `e^{-f}` is a constant plus first eigenfunctions.
    Round,
    /// `K ≠ R`: `f` is constant.
    ConstantCurvature,
    NonConstant,
    Indeterminate,
}

impl Verdict {
    pub fn is_constant(self) -> bool {
        matches!(self, Verdict::Round | Verdict::ConstantCurvature)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Round => "round",
            Verdict::ConstantCurvature => "constant-curvature",
            Verdict::NonConstant => "non-constant",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

pub const NON_CONSTANT_THRESHOLD: f64 = 1e-4;
pub const CONSTANT_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YamabeResult {
    pub verdict: Verdict,
    /// Relative `L²(σ)` projection residual (`K = R`) or variance of `f` (`K ≠ R`).
    pub residual: f64,
}

/// Projection of `e^{-f}` onto `span{1, cos θ}` (`K = R`) or variance of `f` (`K ≠ R`).
pub fn yamabe_classify(grid: &ReducedGrid, f: &[f64]) -> Result<YamabeResult> {
    check_len(grid, f)?;
    let q = grid.weights();
    let residual = if grid.amb().field() == FieldKind::R {
        let w: Vec<f64> = f.iter().map(|x| (-x).exp()).collect();
        let c: Vec<f64> = grid.theta().iter().map(|t| t.cos()).collect();
        let dot = |x: &[f64], y: &[f64]| -> f64 { (0..x.len()).map(|j| q[j] * x[j] * y[j]).sum() };
        let one = vec![1.0; f.len()];
        let (g11, g12, g22) = (dot(&one, &one), dot(&one, &c), dot(&c, &c));
        let (r1, r2) = (dot(&one, &w), dot(&c, &w));
        let det = g11 * g22 - g12 * g12;
        let alpha = (r1 * g22 - r2 * g12) / det;
        let beta = (g11 * r2 - g12 * r1) / det;
        let res: Vec<f64> = (0..f.len()).map(|j| w[j] - alpha - beta * c[j]).collect();
        (dot(&res, &res) / dot(&w, &w)).sqrt()
    } else {
        let total: f64 = q.iter().sum();
        let mean = grid.integrate(f) / total;
        let dev: Vec<f64> = f.iter().map(|x| (x - mean) * (x - mean)).collect();
        grid.integrate(&dev) / total
    };
    let verdict = if residual > NON_CONSTANT_THRESHOLD {
        Verdict::NonConstant
    } else if residual < CONSTANT_THRESHOLD {
        if grid.amb().field() == FieldKind::R {
            Verdict::Round
        } else {
            Verdict::ConstantCurvature
        }
    } else {
        Verdict::Indeterminate
    };
    Ok(YamabeResult { verdict, residual })
}
