//! Time-indexed flow output and its CSV form.

use std::io::Write;

use crate::ambient::{AmbientSpace, FieldKind};
use crate::error::Result;
use crate::flow::FlowState;
use crate::grid::StencilOrder;
use crate::speed::SpeedFunction;

use super::mass::{by_mass, hawking_mass};

/// Scalar diagnostics of one recorded state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleScalars {
    pub t: f64,
    /// Step that produced this state (`0` for the initial sample).
    pub dt: f64,
    pub area: f64,
    /// `|M_t| e^{-(m+a) t / ψ(m+a)}`.
    pub v_norm: f64,
    pub sup_grad_phi_sq: f64,
    pub sup_h_dev: f64,
    pub min_h: f64,
    pub max_pc: f64,
    pub norm_d2phi: f64,
    pub norm_d3phi: f64,
    pub hawking: Option<f64>,
    pub by_mass: f64,
    pub sup_traceless_sq: f64,
    pub sup_horizontal_dev_sq: f64,
    pub sup_vertical_dev_sq: f64,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl SampleScalars {
    pub fn from_state(state: &FlowState, psi: &SpeedFunction, dt: f64) -> Self {
        let s = &state.slice;
        let amb = s.amb();
        let area = s.total_area();
        let k = amb.horosphere_mean_curvature();
        let sup = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
        Self {
            t: state.t,
            dt,
            area,
            v_norm: area * (-k * state.t / psi.eval(k)).exp(),
            sup_grad_phi_sq: s.sup_grad_phi_sq(),
            sup_h_dev: s.sup_h_dev(),
            min_h: s.min_h(),
            max_pc: s.max_pc(),
            norm_d2phi: s.sup_norm_d2phi(),
            norm_d3phi: s.sup_norm_d3phi(),
            hawking: hawking_mass(s).ok(),
            by_mass: by_mass(s),
            sup_traceless_sq: sup(&s.traceless_sq),
            sup_horizontal_dev_sq: sup(&s.horizontal_dev_sq),
            sup_vertical_dev_sq: sup(&s.vertical_dev_sq),
            rho_min: s.rho_min(),
            rho_max: s.rho_max(),
        }
    }

    /// Hawking mass for `K = R`, Brown–York-like mass otherwise.
    pub fn mass(&self) -> f64 {
        self.hawking.unwrap_or(self.by_mass)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub scalars: SampleScalars,
    pub state: Option<FlowState>,
}

/// Recorded samples of one run, times strictly increasing.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub amb: AmbientSpace,
    pub psi: SpeedFunction,
    pub order: StencilOrder,
    pub samples: Vec<Sample>,
    /// Accepted steps.
    pub steps: usize,
}

impl Trajectory {
    pub fn new(amb: AmbientSpace, psi: SpeedFunction, order: StencilOrder) -> Self {
        Self { amb, psi, order, samples: Vec::new(), steps: 0 }
    }

    pub fn push(&mut self, sample: Sample) {
        debug_assert!(self.samples.last().map_or(true, |s| s.scalars.t < sample.scalars.t));
        self.samples.push(sample);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.series(|s| s.t)
    }

    pub fn series(&self, f: impl Fn(&SampleScalars) -> f64) -> Vec<f64> {
        self.samples.iter().map(|s| f(&s.scalars)).collect()
    }

    pub fn t_final(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.scalars.t)
    }

    pub fn final_state(&self) -> Option<&FlowState> {
        self.samples.last().and_then(|s| s.state.as_ref())
    }

    /// First stored state with `t >= time`.
    pub fn state_at_or_after(&self, time: f64) -> Option<&FlowState> {
        self.samples.iter().filter_map(|s| s.state.as_ref()).find(|st| st.t >= time)
    }

    /// Adjacent pairs of stored states.
    pub fn state_pairs(&self) -> impl Iterator<Item = (&FlowState, &FlowState)> {
        self.samples.windows(2).filter_map(|w| Some((w[0].state.as_ref()?, w[1].state.as_ref()?)))
    }

    /// Name of the `mass` column for this ambient space.
    pub fn mass_kind(&self) -> &'static str {
        if self.amb.field() == FieldKind::R {
            "hawking"
        } else {
            "brown-york"
        }
    }
}

pub const CSV_HEADER: &str =
    "t,area,V_norm,sup_grad_phi_sq,sup_H_dev,min_H,max_pc,norm_d2phi,norm_d3phi,mass,rho_min,rho_max,dt";

/// Writes the time series. Floats use the shortest round-trip exponent form.
pub fn write_csv(traj: &Trajectory, mut out: impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for s in &traj.samples {
        let c = &s.scalars;
        let row = [
            c.t,
            c.area,
            c.v_norm,
            c.sup_grad_phi_sq,
            c.sup_h_dev,
            c.min_h,
            c.max_pc,
            c.norm_d2phi,
            c.norm_d3phi,
            c.mass(),
            c.rho_min,
            c.rho_max,
            c.dt,
        ];
        let line: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
