//! Time integration of the scalar flow
//!
//! ```text
//! ∂φ/∂t = v / (sinh ρ · ψ(H))
//! ```
//!
//! with the classical four-stage Runge–Kutta scheme, and the exact ODE
//! `dρ/dt = 1/ψ(Ĥ(ρ))` for geodesic spheres.

use crate::ambient::AmbientSpace;
use crate::diagnostics::trajectory::{Sample, SampleScalars, Trajectory};
use crate::error::{HypflowError, Result};
use crate::geometry::{geometry_slice_with, GeometrySlice, RadialProfile};
use crate::grid::{d1, d2, ReducedGrid, StencilOrder};
use crate::speed::SpeedFunction;

/// Negative real-axis stability interval of classical RK4.
pub const RK4_STABILITY: f64 = 2.785;

/// A profile at time `t` together with its geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub profile: RadialProfile,
    pub slice: GeometrySlice,
}

impl FlowState {
    pub fn new(t: f64, profile: RadialProfile, order: StencilOrder) -> Result<Self> {
        let slice = geometry_slice_with(&profile, order)?;
        Ok(Self { t, profile, slice })
    }
}

/// Time-step bounds for [`Flow::run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub cfl: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(cfl: f64, dt_min: f64, dt_max: f64, t_end: f64, max_steps: usize) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(HypflowError::Precondition(format!("cfl must lie in (0, 1], got {cfl}")));
        }
        if !(dt_min > 0.0 && dt_min <= dt_max && dt_max.is_finite()) {
            return Err(HypflowError::Precondition(format!(
                "need 0 < dt_min <= dt_max, got dt_min = {dt_min}, dt_max = {dt_max}"
            )));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(HypflowError::Precondition(format!("t_end must be positive, got {t_end}")));
        }
        if max_steps == 0 {
            return Err(HypflowError::Precondition("max_steps must be positive".into()));
        }
        Ok(Self { cfl, dt_min, dt_max, t_end, max_steps })
    }

    pub fn until(t_end: f64) -> Self {
        Self { cfl: 0.9, dt_min: 1e-12, dt_max: 0.02, t_end, max_steps: 10_000_000 }
    }
}

/// Output cadence and an optional per-sample observer.
pub struct Hooks<'a> {
    pub output_dt: f64,
    /// Keep full states in the trajectory (needed by residual and limit diagnostics).
    pub keep_states: bool,
    pub observer: Option<Box<dyn FnMut(&Sample) + 'a>>,
}

impl Default for Hooks<'_> {
    fn default() -> Self {
        Self { output_dt: 0.1, keep_states: true, observer: None }
    }
}

impl<'a> Hooks<'a> {
    pub fn every(output_dt: f64) -> Self {
        Self { output_dt, ..Self::default() }
    }
}

/// The flow for a given speed and spatial discretisation.
#[derive(Debug, Clone)]
pub struct Flow {
    pub psi: SpeedFunction,
    pub order: StencilOrder,
}

impl Flow {
    pub fn new(psi: SpeedFunction) -> Self {
        Self { psi, order: StencilOrder::Second }
    }

    pub fn with_order(psi: SpeedFunction, order: StencilOrder) -> Self {
        Self { psi, order }
    }

    pub fn state(&self, t: f64, profile: RadialProfile) -> Result<FlowState> {
        FlowState::new(t, profile, self.order)
    }

    /// `dφ/dt = v / (sinh ρ ψ(H))` at every node.
    pub fn rhs(&self, state: &FlowState) -> Result<Vec<f64>> {
        rhs_of(&state.slice, &self.psi)
    }

    /// Largest stable step for the current state:
    /// `2.785 / (ρ_stencil / h² · max_j b ψ'(H)/ψ(H)² / (c² sinh² ρ))`.
    pub fn stability_bound(&self, state: &FlowState) -> Result<f64> {
        check_mean_convex(&state.slice)?;
        let grid = state.profile.grid();
        let h = grid.h();
        let c = grid.scale();
        let b = grid.base_dim() as f64;
        let mut d_max = 0.0f64;
        for (&hh, &r) in state.slice.h.iter().zip(&state.slice.rho) {
            let psi = self.psi.eval(hh);
            let sh = r.sinh();
            d_max = d_max.max(b * self.psi.deriv(hh) / (psi * psi) / (c * c * sh * sh));
        }
        let lambda = self.order.spectral_radius() / (h * h) * d_max;
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(HypflowError::NumericBlowup { node: 0, quantity: "diffusion coefficient" });
        }
        Ok(RK4_STABILITY / lambda)
    }

    /// One RK4 step of size `dt`. Steps above [`Flow::stability_bound`] are refused.
    pub fn step(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(HypflowError::Precondition(format!("dt must be positive, got {dt}")));
        }
        let bound = self.stability_bound(state)?;
        if dt > bound {
            return Err(HypflowError::Stability { dt, bound });
        }
        self.step_unchecked(state, dt)
    }

    fn step_unchecked(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        let grid = state.profile.grid();
        let phi0 = state.profile.phi();
        let shifted = |k: &[f64], scale: f64| -> Vec<f64> { phi0.iter().zip(k).map(|(p, d)| p + scale * d).collect() };
        let k1 = self.stage_rhs(grid, phi0)?;
        let k2 = self.stage_rhs(grid, &shifted(&k1, 0.5 * dt))?;
        let k3 = self.stage_rhs(grid, &shifted(&k2, 0.5 * dt))?;
        let k4 = self.stage_rhs(grid, &shifted(&k3, dt))?;
        let phi: Vec<f64> = (0..phi0.len())
            .map(|j| phi0[j] + dt / 6.0 * ((k1[j] + k4[j]) + 2.0 * (k2[j] + k3[j])))
            .collect();
        let profile = RadialProfile::from_phi(grid.clone(), phi)
            .map_err(|e| HypflowError::StepRejected(format!("post-step profile invalid: {e}")))?;
        FlowState::new(state.t + dt, profile, self.order)
    }

    /// `v / (sinh ρ ψ(H))` straight from `φ`, using `tanh(ρ/2) = e^φ`.
    fn stage_rhs(&self, grid: &ReducedGrid, phi: &[f64]) -> Result<Vec<f64>> {
        let amb = grid.amb();
        let af = amb.a() as f64;
        let b = grid.base_dim() as f64;
        let c = grid.scale();
        let ft = d1(phi, grid.h(), self.order);
        let ftt = d2(phi, grid.h(), self.order);
        let tang = grid.tangential(&ft, &ftt);
        let mut out = Vec::with_capacity(phi.len());
        for j in 0..phi.len() {
            if !(phi[j] < 0.0) {
                return Err(HypflowError::StepRejected(format!("stage value phi = {} at node {j} left the domain", phi[j])));
            }
            let u = phi[j].exp();
            let denom = -(2.0 * phi[j]).exp_m1();
            let (sh, ch) = (2.0 * u / denom, (1.0 + u * u) / denom);
            let p = ft[j] / c;
            let q = ftt[j] / (c * c);
            let v = (1.0 + p * p).sqrt();
            let inv = 1.0 / (v * sh);
            let h = inv * (b * ch - q / (v * v) - (b - 1.0) * tang[j]) + af * (ch / sh + sh / ch) / v;
            if !(h > 0.0) {
                return Err(if h.is_nan() {
                    HypflowError::NumericBlowup { node: j, quantity: "H" }
                } else {
                    HypflowError::MeanConvexity { node: j, h }
                });
            }
            let value = v * inv * v / self.psi.eval(h);
            if !value.is_finite() {
                return Err(HypflowError::NumericBlowup { node: j, quantity: "dphi/dt" });
            }
            out.push(value);
        }
        Ok(out)
    }

    /// Integrates from `initial` to `control.t_end`.
    ///
    /// Each step uses `dt = min(cfl · stability_bound, dt_max, t_end - t)`.
    /// A sample is recorded at `t = 0`, at the first accepted step past each
    /// multiple of `hooks.output_dt`, and at `t_end`.
    pub fn run(&self, initial: RadialProfile, control: &StepControl, hooks: &mut Hooks<'_>) -> Result<Trajectory> {
        if !(hooks.output_dt > 0.0) {
            return Err(HypflowError::Precondition("output cadence must be positive".into()));
        }
        let amb = *initial.amb();
        let mut state = self.state(0.0, initial)?;
        check_mean_convex(&state.slice)?;
        let mut traj = Trajectory::new(amb, self.psi.clone(), self.order);
        let mut record = |state: &FlowState, dt: f64, traj: &mut Trajectory| {
            let scalars = SampleScalars::from_state(state, &self.psi, dt);
            let sample = Sample { scalars, state: hooks.keep_states.then(|| state.clone()) };
            if let Some(obs) = hooks.observer.as_mut() {
                obs(&sample);
            }
            traj.push(sample);
        };
        record(&state, 0.0, &mut traj);
        let mut next_out = hooks.output_dt;
        let mut steps = 0usize;
        while state.t < control.t_end {
            if steps >= control.max_steps {
                return Err(HypflowError::MaxSteps(control.max_steps));
            }
            let bound = self.stability_bound(&state)?;
            let remaining = control.t_end - state.t;
            let mut dt = (control.cfl * bound).min(control.dt_max);
            let last = dt >= remaining;
            if last {
                dt = remaining;
            } else if dt < control.dt_min {
                return Err(HypflowError::StepRejected(format!(
                    "step {dt:e} at t = {} fell below dt_min = {:e}",
                    state.t, control.dt_min
                )));
            }
            let mut next = self.step_unchecked(&state, dt)?;
            check_mean_convex(&next.slice)?;
            if last {
                next.t = control.t_end;
            }
            steps += 1;
            state = next;
            if state.t >= next_out || last {
                record(&state, dt, &mut traj);
                while next_out <= state.t {
                    next_out += hooks.output_dt;
                }
            }
        }
        traj.steps = steps;
        Ok(traj)
    }

    /// `∂G/∂φ = v cosh ρ/(sinh ρ ψ) (H ψ'/ψ - 1) - ψ'/ψ² (m + a + a/cosh² ρ)`.
    pub fn reaction_coefficient(&self, state: &FlowState) -> Result<Vec<f64>> {
        reaction_coefficient(state, &self.psi)
    }
}

fn check_mean_convex(slice: &GeometrySlice) -> Result<()> {
    for (j, &h) in slice.h.iter().enumerate() {
        if !(h > 0.0) {
            return Err(HypflowError::MeanConvexity { node: j, h });
        }
    }
    Ok(())
}

pub(crate) fn rhs_of(slice: &GeometrySlice, psi: &SpeedFunction) -> Result<Vec<f64>> {
    check_mean_convex(slice)?;
    let mut out = Vec::with_capacity(slice.nodes());
    for j in 0..slice.nodes() {
        let value = slice.v[j] / (slice.rho[j].sinh() * psi.eval(slice.h[j]));
        if !value.is_finite() {
            return Err(HypflowError::NumericBlowup { node: j, quantity: "dphi/dt" });
        }
        out.push(value);
    }
    Ok(out)
}

pub fn rhs(state: &FlowState, psi: &SpeedFunction) -> Result<Vec<f64>> {
    rhs_of(&state.slice, psi)
}

pub fn reaction_coefficient(state: &FlowState, psi: &SpeedFunction) -> Result<Vec<f64>> {
    let s = &state.slice;
    check_mean_convex(s)?;
    let amb = s.amb();
    let (mf, af) = (amb.m() as f64, amb.a() as f64);
    Ok((0..s.nodes())
        .map(|j| {
            let (h, r) = (s.h[j], s.rho[j]);
            let (p, dp) = (psi.eval(h), psi.deriv(h));
            let ch = r.cosh();
            s.v[j] * ch / (r.sinh() * p) * (h * dp / p - 1.0) - dp / (p * p) * (mf + af + af / (ch * ch))
        })
        .collect())
}

/// Radius of the geodesic sphere flow `dρ/dt = 1/ψ(Ĥ(ρ))` at each requested time
/// (ascending, non-negative), by adaptive Dormand–Prince 5(4).
pub fn geodesic_sphere_at(rho0: f64, psi: &SpeedFunction, amb: &AmbientSpace, times: &[f64]) -> Result<Vec<f64>> {
    if !(rho0 > 0.0 && rho0.is_finite()) {
        return Err(HypflowError::Domain(format!("initial radius must be positive, got {rho0}")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(HypflowError::Precondition("sample times must be ascending and non-negative".into()));
    }
    let f = |r: f64| 1.0 / psi.eval(amb.hbar_unchecked(r));
    let (rtol, atol) = (1e-13, 1e-14);
    let mut t: f64 = 0.0;
    let mut r = rho0;
    let mut h: f64 = 1e-3;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let step = h.min(target - t);
            let (r5, err) = dopri_step(&f, r, step);
            let scale = atol + rtol * r.abs().max(r5.abs());
            let ratio = err / scale;
            if ratio <= 1.0 {
                t = if step == target - t { target } else { t + step };
                r = r5;
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h = step * factor;
            if !(h > 1e-14) {
                return Err(HypflowError::StepRejected(format!("ODE step collapsed at t = {t}")));
            }
        }
        out.push(r);
    }
    Ok(out)
}

/// Samples the geodesic sphere flow every `0.01` up to `t_end`.
pub fn geodesic_sphere_ode(rho0: f64, psi: &SpeedFunction, amb: &AmbientSpace, t_end: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let count = (t_end / 0.01).round() as usize;
    let times: Vec<f64> = (0..=count).map(|i| t_end * i as f64 / count.max(1) as f64).collect();
    let rho = geodesic_sphere_at(rho0, psi, amb, &times)?;
    Ok((times, rho))
}

fn dopri_step(f: &impl Fn(f64) -> f64, y: f64, h: f64) -> (f64, f64) {
    let k1 = f(y);
    let k2 = f(y + h * (k1 / 5.0));
    let k3 = f(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    let k4 = f(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    let k5 = f(y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
    let k6 = f(y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4
        - 5103.0 / 18656.0 * k5));
    let y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5
        + 11.0 / 84.0 * k6);
    let k7 = f(y5);
    let e = h * (71.0 / 57600.0 * k1 - 71.0 / 16695.0 * k3 + 71.0 / 1920.0 * k4 - 17253.0 / 339200.0 * k5
        + 22.0 / 525.0 * k6
        - 1.0 / 40.0 * k7);
    (y5, e.abs())
}
