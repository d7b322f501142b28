//! Flat `key = value` summaries of a run.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;

use super::fit::{fit_decay, second_ff_convergence_in, volume_growth, FitWindow, RateFit};
use super::limit::{by_mass_limit, hawking_mass_limit, rescaled_limit, yamabe_classify};
use super::mass::{mass_bound_check, mass_series};
use super::trajectory::Trajectory;

pub const NOT_COMPUTED: &str = "not-computed";

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// A number, optionally with the target and relative tolerance it is judged against.
    Number { value: f64, target: Option<f64>, tol: Option<f64> },
    Text(String),
    Flag(bool),
    /// Explicitly absent, with the reason.
    Missing(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn number(&mut self, key: &str, value: f64) {
        self.entries.push((key.into(), Value::Number { value, target: None, tol: None }));
    }

    pub fn judged(&mut self, key: &str, value: f64, target: f64, tol: f64) {
        self.entries.push((key.into(), Value::Number { value, target: Some(target), tol: Some(tol) }));
    }

    pub fn text(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.into(), Value::Text(value.into())));
    }

    pub fn flag(&mut self, key: &str, value: bool) {
        self.entries.push((key.into(), Value::Flag(value)));
    }

    pub fn missing(&mut self, key: &str, reason: impl Into<String>) {
        self.entries.push((key.into(), Value::Missing(reason.into())));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_number(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            Value::Number { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn entries(&self) -> &[(String, Value)] {
        &self.entries
    }

    /// One `key = value` line per entry; judged numbers add `key.target` and
    /// `key.tol` lines, missing values read `not-computed` followed by a comment.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            match v {
                Value::Number { value, target, tol } => {
                    let _ = writeln!(out, "{k} = {value:e}");
                    if let (Some(t), Some(e)) = (target, tol) {
                        let _ = writeln!(out, "{k}.target = {t:e}");
                        let _ = writeln!(out, "{k}.tol = {e:e}");
                    }
                }
                Value::Text(s) => {
                    let _ = writeln!(out, "{k} = {s}");
                }
                Value::Flag(b) => {
                    let _ = writeln!(out, "{k} = {b}");
                }
                Value::Missing(reason) => {
                    let _ = writeln!(out, "{k} = {NOT_COMPUTED}  # {reason}");
                }
            }
        }
        out
    }

    pub fn write(&self, mut out: impl Write) -> Result<()> {
        out.write_all(self.render().as_bytes())?;
        Ok(())
    }
}

/// Parses rendered reports back into `(key, value)` pairs (comments dropped).
pub fn parse_report(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|line| {
            let line = line.split('#').next()?.trim();
            let (k, v) = line.split_once('=')?;
            Some((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

pub const GRAD_RATE_TOL: f64 = 0.15;
pub const H_RATE_TOL: f64 = 0.20;
pub const VOLUME_RATE_TOL: f64 = 0.05;
pub const SECOND_FF_RATE_TOL: f64 = 0.20;
pub const MONOTONE_TOL: f64 = 1e-8;

fn push_fit(report: &mut Report, key: &str, fit: Result<RateFit>, target: f64, tol: f64) {
    match fit {
        Ok(f) => {
            report.judged(&format!("{key}.rate"), f.rate(), target, tol);
            report.number(&format!("{key}.window_start"), f.t1);
            report.number(&format!("{key}.window_end"), f.t2);
        }
        Err(e) => report.missing(&format!("{key}.rate"), e.to_string()),
    }
}

/// Largest increase of `series` between consecutive samples.
pub fn max_increase(series: &[f64]) -> f64 {
    series.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Runs every trajectory diagnostic and collects the outcome.
pub fn summarize(traj: &Trajectory, window: Option<FitWindow>) -> Report {
    let mut r = Report::new();
    let amb = traj.amb;
    let k = amb.horosphere_mean_curvature();
    let psi_k = traj.psi.eval(k);
    let window = window.unwrap_or_else(|| FitWindow::default_for(traj.t_final()));
    r.text("run.ambient", amb.to_string());
    r.text("run.speed", traj.psi.label());
    r.number("run.t_final", traj.t_final());
    r.number("run.steps", traj.steps as f64);
    r.number("run.samples", traj.len() as f64);

    let times = traj.times();
    let grad = traj.series(|s| s.sup_grad_phi_sq);
    push_fit(&mut r, "grad_decay", fit_decay(&times, &grad, window), 2.0 / psi_k, GRAD_RATE_TOL);
    push_fit(
        &mut r,
        "h_decay",
        fit_decay(&times, &traj.series(|s| s.sup_h_dev), window),
        2.0 / psi_k,
        H_RATE_TOL,
    );
    r.number("grad_monotone.max_increase", max_increase(&grad));
    r.flag("grad_monotone.ok", max_increase(&grad) <= MONOTONE_TOL);
    let min_h = traj.series(|s| s.min_h).into_iter().fold(f64::INFINITY, f64::min);
    r.number("min_h", min_h);
    r.flag("mean_convex", min_h > 0.0);

    match volume_growth(traj) {
        Ok(v) => {
            r.judged("volume_growth.rate", v.fit.slope, v.target, VOLUME_RATE_TOL);
            r.number("volume_growth.v_ratio", v.v_ratio);
            r.flag("volume_growth.bounded", v.bounded);
        }
        Err(e) => r.missing("volume_growth.rate", e.to_string()),
    }

    let ff = second_ff_convergence_in(traj, window);
    if let Some(fit) = ff.traceless {
        push_fit(&mut r, "traceless_decay", fit, ff.traceless_target, SECOND_FF_RATE_TOL);
    }
    push_fit(&mut r, "horizontal_decay", ff.horizontal, ff.horizontal_target, SECOND_FF_RATE_TOL);
    // The vertical rate is only bounded from below; observed decay is faster.
    match ff.vertical {
        Some(Ok(f)) => {
            r.number("vertical_decay.rate", f.rate());
            r.number("vertical_decay.lower_bound", ff.vertical_target);
            r.flag("vertical_decay.ok", f.rate() >= (1.0 - SECOND_FF_RATE_TOL) * ff.vertical_target);
        }
        Some(Err(e)) => r.missing("vertical_decay.rate", e.to_string()),
        None => {}
    }

    let masses = mass_series(traj);
    r.text("mass.kind", traj.mass_kind());
    r.number("mass.initial", masses.values[0]);
    r.number("mass.final", *masses.values.last().unwrap_or(&f64::NAN));
    let rate = if amb.a() == 0 { 2.0 / traj.psi.eval(amb.m() as f64) } else { 2.0 / psi_k };
    match mass_bound_check(&masses, rate) {
        Ok(b) => {
            r.number("mass.bound.rate", b.rate);
            r.number("mass.bound.c", b.c_fit);
            r.number("mass.bound.margin", b.margin);
            r.flag("mass.bound.compliant", b.compliant);
        }
        Err(e) => r.missing("mass.bound.c", e.to_string()),
    }

    match rescaled_limit(traj) {
        Ok(lim) => {
            let grid = traj.final_state().map(|s| s.profile.grid().clone());
            r.number("limit.rho_tilde", lim.rho_tilde);
            r.number("limit.area", lim.area);
            r.number("limit.cauchy", lim.cauchy);
            let f_range = lim.f.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - lim.f.iter().cloned().fold(f64::INFINITY, f64::min);
            r.number("limit.f_oscillation", f_range);
            if let Some(grid) = grid {
                match hawking_mass_limit(&grid, &lim.f) {
                    Ok(v) => r.number("limit.hawking", v),
                    Err(e) => r.missing("limit.hawking", e.to_string()),
                }
                match by_mass_limit(&grid, &lim.f) {
                    Ok(v) => r.number("limit.brown_york", v),
                    Err(e) => r.missing("limit.brown_york", e.to_string()),
                }
                match yamabe_classify(&grid, &lim.f) {
                    Ok(y) => {
                        r.text("yamabe.verdict", y.verdict.to_string());
                        r.number("yamabe.residual", y.residual);
                    }
                    Err(e) => r.missing("yamabe.verdict", e.to_string()),
                }
            }
        }
        Err(e) => {
            for key in ["limit.cauchy", "limit.hawking", "limit.brown_york", "yamabe.verdict"] {
                r.missing(key, e.to_string());
            }
        }
    }
    r
}
