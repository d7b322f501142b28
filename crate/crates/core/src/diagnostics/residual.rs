//! Residuals of the evolution equations for `H` and for the Brown–York-like mass.
//!
//! States are sampled at fixed `θ` (graph parametrisation). The evolution
//! equations hold in normal time, so the graph-time derivative of a function
//! `u` picks up the tangential drift `u_s φ_s / (v ψ sinh ρ)`.

use crate::error::{HypflowError, Result};
use crate::flow::FlowState;
use crate::geometry::GeometrySlice;
use crate::grid::{d1, d2, StencilOrder};
use crate::speed::SpeedFunction;

use super::mass::by_mass;

/// Right-hand side of
/// `∂H/∂t = ψ'/ψ² ΔH + (ψ''ψ - 2ψ'²)/ψ³ |∇H|² - (|A|² + Ric(ν,ν))/ψ`
/// on the induced metric, and the tangential drift of `H`.
pub fn h_evolution_rhs(state: &FlowState, psi: &SpeedFunction, order: StencilOrder) -> (Vec<f64>, Vec<f64>) {
    let s = &state.slice;
    let grid = state.profile.grid();
    let amb = grid.amb();
    let (mf, af) = (amb.m() as f64, amb.a() as f64);
    let b1 = (grid.base_dim() - 1) as f64;
    let ric = amb.ricci();

    let p = grid.ds(&s.phi, order);
    let hs = grid.ds(&s.h, order);
    let hss = grid.dss(&s.h, order);
    let ht = d1(&s.h, grid.h(), order);
    let htt = d2(&s.h, grid.h(), order);
    let tang = grid.tangential(&ht, &htt);
    let vs = grid.ds(&s.v, order);

    let mut rhs = Vec::with_capacity(s.nodes());
    let mut drift = Vec::with_capacity(s.nodes());
    for j in 0..s.nodes() {
        let (r, v, h) = (s.rho[j], s.v[j], s.h[j]);
        let (sh, ch) = (r.sinh(), r.cosh());
        let g = 1.0 / (v * v * sh * sh);
        let rho_s = sh * p[j];
        let first = (mf - 2.0) * ch / sh * rho_s + af * sh / ch * rho_s - vs[j] / v;
        let lap = g * (hss[j] + b1 * tang[j] + first * hs[j]);
        let grad_sq = g * hs[j] * hs[j];
        let (f, df, d2f) = (psi.eval(h), psi.deriv(h), psi.deriv2(h));
        rhs.push(df / (f * f) * lap + (d2f * f - 2.0 * df * df) / (f * f * f) * grad_sq - (s.a_sq[j] + ric) / f);
        drift.push(hs[j] * p[j] / (v * f * sh));
    }
    (rhs, drift)
}

fn check_pair(a: &FlowState, b: &FlowState) -> Result<f64> {
    let dt = b.t - a.t;
    if !(dt > 0.0) {
        return Err(HypflowError::Precondition(format!("sample pair is not ordered in time ({} -> {})", a.t, b.t)));
    }
    if a.profile.grid() != b.profile.grid() {
        return Err(HypflowError::Precondition("sample pair lives on different grids".into()));
    }
    Ok(dt)
}

/// `sup_j |(H_b - H_a)/Δt - drift - RHS|`, with drift and RHS averaged over the
/// two samples.
pub fn evolution_residual_h(a: &FlowState, b: &FlowState, psi: &SpeedFunction, order: StencilOrder) -> Result<f64> {
    let dt = check_pair(a, b)?;
    let (ra, da) = h_evolution_rhs(a, psi, order);
    let (rb, db) = h_evolution_rhs(b, psi, order);
    let mut sup = 0.0f64;
    for j in 0..ra.len() {
        let fd = (b.slice.h[j] - a.slice.h[j]) / dt - 0.5 * (da[j] + db[j]);
        sup = sup.max((fd - 0.5 * (ra[j] + rb[j])).abs());
    }
    Ok(sup)
}

/// `dQ/dt` for the Brown–York-like mass from the evolution identity:
///
/// ```text
/// |M|^{-1+2/k} [ (-1+2/k) |M|^{-1} ∫H/ψ ∫(H-Ĥ)
///              + ∫ (H/ψ)(H-Ĥ) - (|A|² - (m+3a))/ψ
///              + ∫ (m/sinh²ρ - a/cosh²ρ) / (vψ) ]
/// ```
///
/// with `k = m + a`. The last term is `-∂Ĥ/∂t`; along the normal flow
/// `∂ρ/∂t = 1/(vψ)`.
pub fn by_mass_rhs(slice: &GeometrySlice, psi: &SpeedFunction) -> f64 {
    let amb = slice.amb();
    let (mf, af) = (amb.m() as f64, amb.a() as f64);
    let k = amb.horosphere_mean_curvature();
    let ric = amb.ricci();
    let area = slice.total_area();
    let (mut speed, mut excess, mut bulk, mut hbar_term) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..slice.nodes() {
        let w = slice.area_element[j];
        let (h, d, r) = (slice.h[j], slice.h_minus_hbar[j], slice.rho[j]);
        let f = psi.eval(h);
        let (sh, ch) = (r.sinh(), r.cosh());
        speed += h / f * w;
        excess += d * w;
        bulk += (h / f * d - (slice.a_sq[j] + ric) / f) * w;
        hbar_term += (mf / (sh * sh) - af / (ch * ch)) / (slice.v[j] * f) * w;
    }
    area.powf(-1.0 + 2.0 / k) * ((-1.0 + 2.0 / k) / area * speed * excess + bulk + hbar_term)
}

/// `|(Q_b - Q_a)/Δt - (RHS_a + RHS_b)/2|`.
pub fn by_mass_evolution_residual(a: &FlowState, b: &FlowState, psi: &SpeedFunction) -> Result<f64> {
    let dt = check_pair(a, b)?;
    let fd = (by_mass(&b.slice) - by_mass(&a.slice)) / dt;
    Ok((fd - 0.5 * (by_mass_rhs(&a.slice, psi) + by_mass_rhs(&b.slice, psi))).abs())
}
