//! Quasi-local masses and the check of their decay bound along a run.

use crate::ambient::FieldKind;
use crate::error::{HypflowError, Result};
use crate::geometry::GeometrySlice;

use super::fit::{fit_decay, FitWindow};
use super::trajectory::Trajectory;

/// Modified Hawking mass `|M|^{-1+4/m} ∫ |Å|² dμ` (`K = R` only).
pub fn hawking_mass(slice: &GeometrySlice) -> Result<f64> {
    let amb = slice.amb();
    if amb.field() != FieldKind::R {
        return Err(HypflowError::WrongField(format!("the Hawking mass is defined for K = R, got {amb}")));
    }
    let m = amb.m() as f64;
    let integral: f64 = slice.traceless_sq.iter().zip(&slice.area_element).map(|(a, w)| a * w).sum();
    Ok(slice.total_area().powf(-1.0 + 4.0 / m) * integral)
}

/// Brown–York-like mass `|M|^{-1+2/(m+a)} ∫ (H - Ĥ(ρ)) dμ`.
pub fn by_mass(slice: &GeometrySlice) -> f64 {
    let k = slice.amb().horosphere_mean_curvature();
    let integral: f64 = slice.h_minus_hbar.iter().zip(&slice.area_element).map(|(d, w)| d * w).sum();
    slice.total_area().powf(-1.0 + 2.0 / k) * integral
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassKind {
    Hawking,
    BrownYork,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassSeries {
    pub kind: MassKind,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Limit-formula value for the run's conformal limit, when computed.
    pub limit: Option<f64>,
}

/// The trajectory's natural mass: Hawking for `K = R`, Brown–York-like otherwise.
pub fn mass_series(traj: &Trajectory) -> MassSeries {
    let kind = if traj.amb.field() == FieldKind::R { MassKind::Hawking } else { MassKind::BrownYork };
    MassSeries { kind, times: traj.times(), values: traj.series(|s| s.mass()), limit: None }
}

pub fn by_mass_series(traj: &Trajectory) -> MassSeries {
    MassSeries { kind: MassKind::BrownYork, times: traj.times(), values: traj.series(|s| s.by_mass), limit: None }
}

/// Outcome of checking `dQ/dt ≥ -c e^{-rate t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassBoundReport {
    pub rate: f64,
    /// Smallest `c` with `-dQ/dt ≤ c e^{-rate t}` at every sample.
    pub c_fit: f64,
    pub negative_points: usize,
    /// Fitted decay rate of the negative part of `dQ/dt`, when enough points exist.
    pub negative_rate: Option<f64>,
    pub compliant: bool,
    /// `inf_t (Q(t) - (c/rate) e^{-rate t})`, a lower bound for `lim Q`.
    pub margin: f64,
    pub noise_floor: f64,
}

/// Minimum number of negative derivative samples before the decay of the
/// negative part is fitted.
pub const MIN_NEGATIVE_POINTS: usize = 3;
/// Fraction of the target rate the negative part must decay at.
pub const NEGATIVE_RATE_FRACTION: f64 = 0.8;

/// Finite-difference `dQ/dt` on possibly non-uniform sample times.
pub fn time_derivative(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1.min(n - 1)),
                _ if i + 1 == n => (i - 1, i),
                _ => (i - 1, i + 1),
            };
            if a == b {
                0.0
            } else {
                (values[b] - values[a]) / (times[b] - times[a])
            }
        })
        .collect()
}

pub fn mass_bound_check(series: &MassSeries, rate: f64) -> Result<MassBoundReport> {
    if series.times.len() < 2 {
        return Err(HypflowError::Precondition("mass bound check needs at least two samples".into()));
    }
    if !(rate > 0.0) {
        return Err(HypflowError::Precondition(format!("decay rate must be positive, got {rate}")));
    }
    let (t, q) = (&series.times, &series.values);
    let dq = time_derivative(t, q);
    let scale = q.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let noise_floor = 1e-9 * (1.0 + scale);
    let mut c_fit = 0.0f64;
    let mut neg_t = Vec::new();
    let mut neg_v = Vec::new();
    for (&ti, &d) in t.iter().zip(&dq) {
        if d < -noise_floor {
            c_fit = c_fit.max(-d * (rate * ti).exp());
            neg_t.push(ti);
            neg_v.push(-d);
        }
    }
    let negative_rate = if neg_t.len() >= MIN_NEGATIVE_POINTS {
        let window = FitWindow { t1: neg_t[0], t2: neg_t[neg_t.len() - 1] };
        fit_decay(&neg_t, &neg_v, window).ok().map(|f| f.rate())
    } else {
        None
    };
    let compliant = c_fit.is_finite()
        && (neg_t.len() < MIN_NEGATIVE_POINTS || negative_rate.is_some_and(|r| r >= NEGATIVE_RATE_FRACTION * rate));
    let margin = t
        .iter()
        .zip(q)
        .map(|(&ti, &qi)| qi - c_fit / rate * (-rate * ti).exp())
        .fold(f64::INFINITY, f64::min);
    Ok(MassBoundReport {
        rate,
        c_fit,
        negative_points: neg_t.len(),
        negative_rate,
        compliant,
        margin,
        noise_floor,
    })
}
