use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hypflow::diagnostics::report::parse_report;
use hypflow::diagnostics::CSV_HEADER;
use hypflow::geometry::write_profile;
use hypflow::{make_ambient, FieldKind, RadialProfile};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypflow"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hypflow-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, format!("{body}output.dir = {}\n", dir.join("out").display())).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn summary(dir: &Path) -> Vec<(String, String)> {
    parse_report(&fs::read_to_string(dir.join("out/summary.txt")).unwrap())
}

fn lookup<'a>(kv: &'a [(String, String)], key: &str) -> &'a str {
    &kv.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("missing {key}")).1
}

#[test]
fn validate_speed_exit_codes() {
    for spec in ["imcf", "log1p", "power:0.5", "powersum:0.5,0.3;0.5,1"] {
        let o = run(&["validate-speed", spec]);
        assert_eq!(code(&o), 0, "{spec}: {}", stdout(&o));
        assert!(stdout(&o).ends_with("result = pass\n"));
    }
    let o = run(&["validate-speed", "power:2"]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    assert!(text.contains("ii) x psi'/psi <= 1: FAIL"), "{text}");
    assert!(text.contains("iii) psi'' psi - 2 psi'^2 <= 0: pass"), "{text}");
    assert_eq!(code(&run(&["validate-speed", "power:"])), 2);
    assert_eq!(code(&run(&["validate-speed", "nonsense"])), 2);
}

#[test]
fn geodesic_sphere_run_summary() {
    let dir = scratch("sphere");
    let cfg = write_config(
        &dir,
        "ambient.field = R\nambient.n = 3\nspeed = imcf\ninit.family = constant\ninit.tau = 1\ngrid.nodes = 65\ntime.t_end = 6\n",
    );
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let kv = summary(&dir);
    let rate: f64 = lookup(&kv, "volume_growth.rate").parse().unwrap();
    assert!((rate - 1.0).abs() < 0.05, "{rate}");
    let mass: f64 = lookup(&kv, "mass.final").parse().unwrap();
    assert!(mass.abs() < 1e-10, "{mass}");
    assert_eq!(lookup(&kv, "mass.kind"), "hawking");
    assert_eq!(lookup(&kv, "yamabe.verdict"), "round");
    // A constant series has no decay to fit; the summary says so explicitly.
    assert_eq!(lookup(&kv, "grad_decay.rate"), "not-computed");
}

#[test]
fn csv_schema_and_determinism() {
    let dir = scratch("determinism");
    let body = "ambient.field = C\nambient.n = 2\nspeed = log1p\ninit.family = cosk\ninit.tau = 2\ninit.eps = 0.2\ninit.mode = 2\ngrid.nodes = 65\ntime.t_end = 1\noutput.dt = 0.05\n";
    let cfg = write_config(&dir, body);
    let a = dir.join("a");
    let b = dir.join("b");
    for out in [&a, &b] {
        let o = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv_a = fs::read(a.join("series.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("series.csv")).unwrap());
    let text = String::from_utf8(csv_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,area,V_norm,sup_grad_phi_sq,sup_H_dev,min_H,max_pc,norm_d2phi,norm_d3phi,mass,rho_min,rho_max,dt");
    assert_eq!(CSV_HEADER, "t,area,V_norm,sup_grad_phi_sq,sup_H_dev,min_H,max_pc,norm_d2phi,norm_d3phi,mass,rho_min,rho_max,dt");
    assert_eq!(lines.count(), 21);
}

#[test]
fn perturbed_real_hyperbolic_run_is_not_round() {
    let dir = scratch("legendre");
    let cfg = write_config(
        &dir,
        "ambient.field = R\nambient.n = 3\ninit.family = legendre\ninit.tau = 6\ninit.eps = 0.5\ninit.mode = 2\ntime.t_end = 8\n",
    );
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let kv = summary(&dir);
    assert_eq!(lookup(&kv, "yamabe.verdict"), "non-constant");
    assert_eq!(lookup(&kv, "mass.bound.compliant"), "true");
}

#[test]
fn datum_that_is_not_mean_convex_is_refused() {
    let dir = scratch("concave");
    let cfg = write_config(
        &dir,
        "ambient.field = R\nambient.n = 3\ninit.family = cosk\ninit.tau = 0.3\ninit.eps = 0.25\ninit.mode = 12\ngrid.nodes = 129\ntime.t_end = 1\n",
    );
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("initial data") && err.contains("not mean convex"), "{err}");
    assert!(!dir.join("out/series.csv").exists());
}

#[test]
fn config_errors_exit_two() {
    let dir = scratch("badcfg");
    let cfg = write_config(&dir, "ambient.field = X\nambient.n = 3\n");
    assert_eq!(code(&run(&["run", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["run", dir.join("missing.cfg").to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn file_family_round_trip() {
    let dir = scratch("file");
    let amb = make_ambient(FieldKind::H, 2).unwrap();
    let profile = RadialProfile::from_fn(amb, 65, |t| 2.0 + 0.1 * (2.0 * t).cos()).unwrap();
    let path = dir.join("start.profile");
    write_profile(&profile, fs::File::create(&path).unwrap()).unwrap();
    let body = format!(
        "ambient.field = H\nambient.n = 2\ninit.family = file\ninit.path = {}\ngrid.nodes = 65\ntime.t_end = 0.5\n",
        path.display()
    );
    let cfg = write_config(&dir, &body);
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(lookup(&summary(&dir), "mass.kind"), "brown-york");

    let wrong = write_config(&dir, &body.replace("grid.nodes = 65", "grid.nodes = 129"));
    assert_eq!(code(&run(&["run", wrong.to_str().unwrap()])), 2);
}

#[test]
fn sweep_over_speeds() {
    let dir = scratch("sweep");
    let cfg = dir.join("sweep.cfg");
    fs::write(
        &cfg,
        "ambient.field = R\nambient.n = 3\ninit.family = cosk\ninit.tau = 3\ninit.eps = 0.3\ninit.mode = 2\n\
         grid.nodes = 129\ntime.t_end = 6\ndiagnostics.fit_start = 2\ndiagnostics.fit_end = 6\n\
         sweep.speed = imcf | log1p | power:0.5\n",
    )
    .unwrap();
    let out = dir.join("runs");
    let o = bin()
        .args(["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("HYPFLOW_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let agg = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    let rows: Vec<&str> = agg.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("run,speed,status,exit,grad_decay.rate,"));
    // Target 2/ψ(2) per row.
    for (row, target) in rows[1..].iter().zip([1.0, 2.0 / 3f64.ln(), 2.0 / 2f64.sqrt()]) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[2], "ok");
        let rate: f64 = cols[4].parse().unwrap();
        assert!((rate - target).abs() < 0.15 * target, "{row}");
    }
    for i in 0..3 {
        let run_dir = out.join(format!("run_{i:03}"));
        assert!(run_dir.join("series.csv").exists());
        assert!(run_dir.join("summary.txt").exists());
        assert!(run_dir.join("config.txt").exists());
    }
}

#[test]
fn sweep_refusals() {
    let dir = scratch("sweep-refuse");
    let base = "ambient.field = R\nambient.n = 3\ninit.family = constant\ninit.tau = 1\ntime.t_end = 1\n";
    let capped = dir.join("capped.cfg");
    fs::write(&capped, format!("{base}sweep.speed = imcf | log1p\nsweep.cap = 1\n")).unwrap();
    assert_eq!(code(&run(&["sweep", capped.to_str().unwrap(), "--out", dir.join("a").to_str().unwrap()])), 2);
    let empty = dir.join("empty.cfg");
    fs::write(&empty, format!("{base}sweep.speed =\n")).unwrap();
    assert_eq!(code(&run(&["sweep", empty.to_str().unwrap(), "--out", dir.join("b").to_str().unwrap()])), 2);
    assert!(!dir.join("a").exists());
}

#[test]
fn compare_ode_on_spheres() {
    for (field, speed) in [("R", "imcf"), ("H", "log1p")] {
        let dir = scratch(&format!("ode-{field}"));
        let n = if field == "R" { 3 } else { 2 };
        let cfg = write_config(
            &dir,
            &format!("ambient.field = {field}\nambient.n = {n}\nspeed = {speed}\ninit.family = constant\ninit.tau = 1\ngrid.nodes = 65\ntime.t_end = 5\n"),
        );
        let o = run(&["compare-ode", cfg.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        let kv = parse_report(&stdout(&o));
        let dev: f64 = lookup(&kv, "ode.max_rel_deviation").parse().unwrap();
        assert!(dev <= 1e-6, "{dev}");
    }
    let dir = scratch("ode-perturbed");
    let cfg = write_config(
        &dir,
        "ambient.field = R\nambient.n = 3\ninit.family = cosk\ninit.tau = 1\ninit.eps = 0.1\ninit.mode = 2\ntime.t_end = 1\n",
    );
    assert_eq!(code(&run(&["compare-ode", cfg.to_str().unwrap()])), 2);
}
