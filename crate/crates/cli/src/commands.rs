//! The four subcommands. Each returns the text to print and an exit code;
//! files are written under the configured output directory.

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use hypflow::diagnostics::report::Value;
use hypflow::diagnostics::{summarize, write_csv, Report, Trajectory};
use hypflow::flow::geodesic_sphere_at;
use hypflow::speed::{default_grid, Condition};
use hypflow::{make_ambient, validate_speed, Flow, HypflowError, Hooks, SpeedFunction};

use crate::config::{Pairs, RunConfig, SweepConfig};
use crate::error::{exit, CliError};

/// Relative tolerance of the PDE/ODE comparison on constant data.
pub const ODE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub text: String,
}

pub fn cmd_validate_speed(spec: &str) -> Result<Outcome, CliError> {
    let psi: SpeedFunction = spec.parse().map_err(|e| CliError::config(format!("speed `{spec}`: {e}")))?;
    let mut text = format!("speed = {}\n", psi.label());
    let report = match validate_speed(&psi, &default_grid()) {
        Ok(r) => r,
        Err(e @ (HypflowError::NonFiniteSpeed { .. } | HypflowError::Domain(_))) => {
            let _ = writeln!(text, "evaluation = {e}\nresult = fail");
            return Ok(Outcome { code: exit::VERIFICATION, text });
        }
        Err(e) => return Err(CliError::module("speed validation", e)),
    };
    for cond in [Condition::ZeroLimit, Condition::Positivity, Condition::Elasticity, Condition::Convexity] {
        let count = report.count(cond);
        if count == 0 {
            let _ = writeln!(text, "{cond}: pass");
        } else {
            let worst = report
                .violations
                .iter()
                .filter(|v| v.condition == cond)
                .max_by(|a, b| a.lhs.total_cmp(&b.lhs))
                .expect("count > 0");
            let _ = writeln!(text, "{cond}: FAIL at {count} points, worst x = {:e}, value = {:e}", worst.x, worst.lhs);
        }
    }
    let _ = writeln!(text, "result = {}", if report.passed { "pass" } else { "fail" });
    Ok(Outcome { code: if report.passed { exit::SUCCESS } else { exit::VERIFICATION }, text })
}

/// Integrates the configured flow after checking the datum is mean convex.
pub fn run_flow(cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let amb = make_ambient(cfg.field, cfg.n).map_err(|e| CliError::module("config", e))?;
    let profile = cfg.init.profile(amb, cfg.nodes)?;
    let flow = Flow::with_order(cfg.speed.clone(), cfg.order);
    let initial = flow.state(0.0, profile.clone()).map_err(|e| CliError::module("initial data", e))?;
    let min_h = initial.slice.min_h();
    if !(min_h > 0.0) {
        return Err(CliError::module(
            "initial data",
            HypflowError::Precondition(format!("datum is not mean convex: min H = {min_h:e}")),
        ));
    }
    let mut hooks = Hooks::every(cfg.output_dt);
    flow.run(profile, &cfg.control, &mut hooks).map_err(|e| CliError::module("flow", e))
}

/// Keys of judged values that miss their target, and failed flags.
pub fn failed_checks(report: &Report) -> Vec<String> {
    const FLAG_SUFFIXES: [&str; 4] = [".ok", ".bounded", ".compliant", "mean_convex"];
    report
        .entries()
        .iter()
        .filter(|(k, v)| match v {
            Value::Number { value, target: Some(t), tol: Some(e) } => !((value - t).abs() <= e * t.abs()),
            Value::Flag(false) => FLAG_SUFFIXES.iter().any(|s| k.ends_with(s)),
            _ => false,
        })
        .map(|(k, _)| k.clone())
        .collect()
}

fn run_report(cfg: &RunConfig, traj: &Trajectory) -> Report {
    let mut report = summarize(traj, cfg.window);
    report.number("run.nodes", cfg.nodes as f64);
    report.text("run.order", format!("{:?}", cfg.order).to_lowercase());
    report
}

pub fn cmd_run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    run_and_write(cfg).map(|(outcome, _)| outcome)
}

fn run_and_write(cfg: &RunConfig) -> Result<(Outcome, Report), CliError> {
    let traj = run_flow(cfg)?;
    let report = run_report(cfg, &traj);
    fs::create_dir_all(&cfg.out_dir)?;
    let csv_path = cfg.out_dir.join(&cfg.csv_name);
    write_csv(&traj, BufWriter::new(fs::File::create(&csv_path)?)).map_err(|e| CliError::module("output", e))?;
    let summary_path = cfg.out_dir.join(&cfg.summary_name);
    fs::write(&summary_path, report.render())?;
    let failures = failed_checks(&report);
    let mut text = report.render();
    let _ = writeln!(text, "# series: {}\n# summary: {}", csv_path.display(), summary_path.display());
    if !failures.is_empty() {
        let _ = writeln!(text, "# off target: {}", failures.join(", "));
    }
    let code = if cfg.strict && !failures.is_empty() { exit::VERIFICATION } else { exit::SUCCESS };
    Ok((Outcome { code, text }, report))
}

/// Sweep concurrency: `HYPFLOW_THREADS` if set, otherwise the available cores.
pub fn thread_cap() -> Result<usize, CliError> {
    match std::env::var("HYPFLOW_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::config(format!("HYPFLOW_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

const AGGREGATE_METRICS: [&str; 9] = [
    "grad_decay.rate",
    "h_decay.rate",
    "volume_growth.rate",
    "mass.final",
    "mass.bound.compliant",
    "limit.hawking",
    "limit.brown_york",
    "yamabe.verdict",
    "yamabe.residual",
];

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn value_text(v: Option<&Value>) -> String {
    match v {
        Some(Value::Number { value, .. }) => format!("{value:e}"),
        Some(Value::Text(s)) => s.clone(),
        Some(Value::Flag(b)) => b.to_string(),
        Some(Value::Missing(_)) | None => hypflow::diagnostics::report::NOT_COMPUTED.to_string(),
    }
}

fn render_pairs(pairs: &Pairs) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

struct SweepRow {
    code: u8,
    status: String,
    report: Option<Report>,
}

fn sweep_one(pairs: &Pairs) -> SweepRow {
    let cfg = match RunConfig::from_pairs(pairs) {
        Ok(c) => c,
        Err(e) => return SweepRow { code: e.exit_code(), status: e.to_string(), report: None },
    };
    let result = fs::create_dir_all(&cfg.out_dir)
        .map_err(CliError::from)
        .and_then(|_| fs::write(cfg.out_dir.join("config.txt"), render_pairs(pairs)).map_err(CliError::from))
        .and_then(|_| run_and_write(&cfg));
    match result {
        Ok((outcome, report)) => {
            let status = if outcome.code == exit::SUCCESS { "ok" } else { "off-target" };
            SweepRow { code: outcome.code, status: status.to_string(), report: Some(report) }
        }
        Err(e) => SweepRow { code: e.exit_code(), status: e.to_string(), report: None },
    }
}

/// Runs every combination in its own directory `run_NNN` under `out_dir`, then
/// writes `aggregate.csv`. The exit code is the worst over all runs.
pub fn cmd_sweep(sweep: &SweepConfig, out_dir: &Path, threads: usize) -> Result<Outcome, CliError> {
    let combos = sweep.combinations()?;
    fs::create_dir_all(out_dir)?;
    let jobs: Vec<(PathBuf, Pairs)> = combos
        .iter()
        .enumerate()
        .map(|(i, assignment)| {
            let dir = out_dir.join(format!("run_{i:03}"));
            let mut pairs: Pairs = sweep.merged(assignment).into_iter().filter(|(k, _)| k != "output.dir").collect();
            pairs.push(("output.dir".into(), dir.display().to_string()));
            (dir, pairs)
        })
        .collect();
    let rows: Mutex<Vec<Option<SweepRow>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1).min(jobs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((_, pairs)) = jobs.get(i) else { break };
                let row = sweep_one(pairs);
                rows.lock().expect("sweep worker panicked")[i] = Some(row);
            });
        }
    });
    let rows: Vec<SweepRow> =
        rows.into_inner().expect("sweep worker panicked").into_iter().map(|r| r.expect("every job ran")).collect();

    let mut csv = String::from("run");
    for (key, _) in &sweep.axes {
        let _ = write!(csv, ",{}", csv_field(key));
    }
    let _ = write!(csv, ",status,exit");
    for m in AGGREGATE_METRICS {
        let _ = write!(csv, ",{m}");
    }
    csv.push('\n');
    for (i, (assignment, row)) in combos.iter().zip(&rows).enumerate() {
        let _ = write!(csv, "run_{i:03}");
        for (_, v) in assignment {
            let _ = write!(csv, ",{}", csv_field(v));
        }
        let _ = write!(csv, ",{},{}", csv_field(&row.status), row.code);
        for m in AGGREGATE_METRICS {
            let _ = write!(csv, ",{}", csv_field(&value_text(row.report.as_ref().and_then(|r| r.get(m)))));
        }
        csv.push('\n');
    }
    let path = out_dir.join("aggregate.csv");
    fs::write(&path, &csv)?;
    let code = rows.iter().map(|r| r.code).max().unwrap_or(exit::SUCCESS);
    Ok(Outcome { code, text: format!("{csv}# aggregate: {}\n", path.display()) })
}

pub fn cmd_compare_ode(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let amb = make_ambient(cfg.field, cfg.n).map_err(|e| CliError::module("config", e))?;
    let profile = cfg.init.profile(amb, cfg.nodes)?;
    if !profile.is_constant() {
        return Err(CliError::config("compare-ode needs constant initial data"));
    }
    let rho0 = profile.rho()[0];
    let traj = run_flow(cfg)?;
    let times = traj.times();
    let ode = geodesic_sphere_at(rho0, &cfg.speed, &amb, &times).map_err(|e| CliError::module("ode reference", e))?;
    let deviation = traj
        .samples
        .iter()
        .zip(&ode)
        .map(|(s, r)| ((s.scalars.rho_max - r).abs().max((s.scalars.rho_min - r).abs())) / r)
        .fold(0.0, f64::max);
    let mut report = Report::new();
    report.text("run.ambient", amb.to_string());
    report.text("run.speed", cfg.speed.label());
    report.number("run.t_final", traj.t_final());
    report.number("ode.samples", times.len() as f64);
    report.number("ode.max_rel_deviation", deviation);
    report.number("ode.tol", ODE_TOL);
    let ok = deviation <= ODE_TOL;
    report.flag("ode.ok", ok);
    Ok(Outcome { code: if ok { exit::SUCCESS } else { exit::VERIFICATION }, text: report.render() })
}
