//! Log-linear rate fits on time series.

use crate::error::{HypflowError, Result};

use super::trajectory::Trajectory;

/// Least-squares fit `ln y ≈ intercept + slope · t` on `[t1, t2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub t1: f64,
    pub t2: f64,
    /// Root-mean-square residual of the log fit.
    pub residual: f64,
    pub points: usize,
}

impl RateFit {
    /// Exponential decay rate, `-slope`.
    pub fn rate(&self) -> f64 {
        -self.slope
    }

    pub fn relative_error(&self, target: f64) -> f64 {
        (self.rate() - target).abs() / target.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub t1: f64,
    pub t2: f64,
}

impl FitWindow {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !(t2 > t1) {
            return Err(HypflowError::Fit(format!("empty fit window [{t1}, {t2}]")));
        }
        Ok(Self { t1, t2 })
    }

    /// The last 60% of a run ending at `t_end`, never starting before `t = 2`.
    pub fn default_for(t_end: f64) -> Self {
        Self { t1: (0.4 * t_end).max(2.0).min(t_end), t2: t_end }
    }
}

/// Fits `ln(series)` against `t` over the window.
pub fn fit_decay(times: &[f64], series: &[f64], window: FitWindow) -> Result<RateFit> {
    if times.len() != series.len() {
        return Err(HypflowError::Fit("times and series differ in length".into()));
    }
    let mut pts = Vec::new();
    for (&t, &y) in times.iter().zip(series) {
        if t < window.t1 - 1e-12 || t > window.t2 + 1e-12 {
            continue;
        }
        if !(y > 0.0 && y.is_finite()) {
            return Err(HypflowError::Fit(format!("non-positive value {y:e} at t = {t} inside the fit window")));
        }
        pts.push((t, y.ln()));
    }
    if pts.len() < 2 {
        return Err(HypflowError::Fit(format!(
            "only {} points in window [{}, {}]",
            pts.len(),
            window.t1,
            window.t2
        )));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    if sxx == 0.0 {
        return Err(HypflowError::Fit("all window points share one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(RateFit {
        slope,
        intercept,
        t1: pts[0].0,
        t2: pts[pts.len() - 1].0,
        residual: (ss / n).sqrt(),
        points: pts.len(),
    })
}

pub const V_RATIO_BOUND: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeGrowth {
    /// Fit of `ln |M_t|`; `slope` is the growth rate.
    pub fit: RateFit,
    pub target: f64,
    /// `max V / min V` for `V = |M_t| e^{-(m+a) t/ψ(m+a)}` over the whole run.
    pub v_ratio: f64,
    pub bounded: bool,
}

pub fn volume_growth(traj: &Trajectory) -> Result<VolumeGrowth> {
    volume_growth_in(traj, FitWindow::default_for(traj.t_final()))
}

pub fn volume_growth_in(traj: &Trajectory, window: FitWindow) -> Result<VolumeGrowth> {
    let k = traj.amb.horosphere_mean_curvature();
    let fit = fit_decay(&traj.times(), &traj.series(|s| s.area), window)?;
    let v = traj.series(|s| s.v_norm);
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let v_ratio = max / min;
    Ok(VolumeGrowth { fit, target: k / traj.psi.eval(k), v_ratio, bounded: v_ratio <= V_RATIO_BOUND })
}

/// Decay fits for the second fundamental form.
#[derive(Debug)]
pub struct SecondFormRates {
    /// `sup |Å|²` (`K = R`); target `4/ψ(m)`.
    pub traceless: Option<Result<RateFit>>,
    /// `sup Σ_horizontal (h_ii - 1)²`; target `4/ψ(m+a)`.
    pub horizontal: Result<RateFit>,
    /// `sup Σ_vertical (h_kk - 2)²` (`K ≠ R`); target `2/ψ(m+a)` or faster.
    pub vertical: Option<Result<RateFit>>,
    pub traceless_target: f64,
    pub horizontal_target: f64,
    pub vertical_target: f64,
}

pub fn second_ff_convergence(traj: &Trajectory) -> SecondFormRates {
    second_ff_convergence_in(traj, FitWindow::default_for(traj.t_final()))
}

pub fn second_ff_convergence_in(traj: &Trajectory, window: FitWindow) -> SecondFormRates {
    let times = traj.times();
    let amb = traj.amb;
    let k = amb.horosphere_mean_curvature();
    let psi_k = traj.psi.eval(k);
    let is_real = amb.a() == 0;
    SecondFormRates {
        traceless: is_real.then(|| fit_decay(&times, &traj.series(|s| s.sup_traceless_sq), window)),
        horizontal: fit_decay(&times, &traj.series(|s| s.sup_horizontal_dev_sq), window),
        vertical: (!is_real).then(|| fit_decay(&times, &traj.series(|s| s.sup_vertical_dev_sq), window)),
        traceless_target: 4.0 / traj.psi.eval(amb.m() as f64),
        horizontal_target: 4.0 / psi_k,
        vertical_target: 2.0 / psi_k,
    }
}
