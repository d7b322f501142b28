//! Flat `key = value` run configuration with optional sweep axes.

use std::path::PathBuf;

use hypflow::diagnostics::FitWindow;
use hypflow::{FieldKind, SpeedFunction, StencilOrder, StepControl};

use crate::error::CliError;
use crate::init::InitSpec;

pub const DEFAULT_SWEEP_CAP: usize = 64;

const KEYS: &[&str] = &[
    "ambient.field",
    "ambient.n",
    "speed",
    "init.family",
    "init.tau",
    "init.eps",
    "init.mode",
    "init.path",
    "grid.nodes",
    "grid.order",
    "time.t_end",
    "time.cfl",
    "time.dt_min",
    "time.dt_max",
    "time.max_steps",
    "output.dir",
    "output.dt",
    "output.csv",
    "output.summary",
    "diagnostics.fit_start",
    "diagnostics.fit_end",
    "diagnostics.strict",
];

/// Ordered `(key, value)` pairs as written in the file.
pub type Pairs = Vec<(String, String)>;

/// Splits a config text into pairs; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Pairs, CliError> {
    let mut pairs: Pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected `key = value`, got `{line}`", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::config(format!("line {}: empty key", i + 1)));
        }
        if pairs.iter().any(|(p, _)| p == k) {
            return Err(CliError::config(format!("line {}: duplicate key `{k}`", i + 1)));
        }
        pairs.push((k.to_string(), v.to_string()));
    }
    Ok(pairs)
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub field: FieldKind,
    pub n: usize,
    pub speed: SpeedFunction,
    pub init: InitSpec,
    pub nodes: usize,
    pub order: StencilOrder,
    pub control: StepControl,
    pub output_dt: f64,
    pub out_dir: PathBuf,
    pub csv_name: String,
    pub summary_name: String,
    pub window: Option<FitWindow>,
    /// Exit with status 1 when any judged summary value misses its target.
    pub strict: bool,
}

fn get<'a>(pairs: &'a Pairs, key: &str) -> Option<&'a str> {
    pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn parse_num<T: std::str::FromStr>(pairs: &Pairs, key: &str, default: Option<T>) -> Result<T, CliError> {
    match get(pairs, key) {
        Some(v) => v.parse().map_err(|_| CliError::config(format!("`{key}`: cannot parse `{v}`"))),
        None => default.ok_or_else(|| CliError::config(format!("missing required key `{key}`"))),
    }
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let pairs = parse_pairs(text)?;
        if pairs.iter().any(|(k, _)| k.starts_with("sweep.")) {
            return Err(CliError::config("sweep keys are only accepted by the sweep command"));
        }
        Self::from_pairs(&pairs)
    }

    pub fn from_pairs(pairs: &Pairs) -> Result<Self, CliError> {
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !KEYS.contains(&k.as_str())) {
            return Err(CliError::config(format!("unknown key `{k}`")));
        }
        let field: FieldKind = get(pairs, "ambient.field")
            .ok_or_else(|| CliError::config("missing required key `ambient.field`"))?
            .parse()
            .map_err(|e| CliError::config(format!("`ambient.field`: {e}")))?;
        let n = parse_num(pairs, "ambient.n", None)?;
        let speed: SpeedFunction = get(pairs, "speed")
            .unwrap_or("imcf")
            .parse()
            .map_err(|e| CliError::config(format!("`speed`: {e}")))?;
        let init = InitSpec::from_pairs(pairs)?;
        let nodes = parse_num(pairs, "grid.nodes", Some(512))?;
        let order = match get(pairs, "grid.order").unwrap_or("second") {
            "second" | "2" => StencilOrder::Second,
            "fourth" | "4" => StencilOrder::Fourth,
            other => return Err(CliError::config(format!("`grid.order`: expected second or fourth, got `{other}`"))),
        };
        let t_end: f64 = parse_num(pairs, "time.t_end", None)?;
        let base = StepControl::until(t_end);
        let control = StepControl::new(
            parse_num(pairs, "time.cfl", Some(base.cfl))?,
            parse_num(pairs, "time.dt_min", Some(base.dt_min))?,
            parse_num(pairs, "time.dt_max", Some(base.dt_max))?,
            t_end,
            parse_num(pairs, "time.max_steps", Some(base.max_steps))?,
        )
        .map_err(|e| CliError::config(format!("time control: {e}")))?;
        let output_dt: f64 = parse_num(pairs, "output.dt", Some(0.1))?;
        if !(output_dt > 0.0 && output_dt.is_finite()) {
            return Err(CliError::config(format!("`output.dt` must be positive, got {output_dt}")));
        }
        let window = match (get(pairs, "diagnostics.fit_start"), get(pairs, "diagnostics.fit_end")) {
            (None, None) => None,
            _ => {
                let t1 = parse_num(pairs, "diagnostics.fit_start", Some(2.0))?;
                let t2 = parse_num(pairs, "diagnostics.fit_end", Some(t_end))?;
                Some(FitWindow::new(t1, t2).map_err(|e| CliError::config(format!("fit window: {e}")))?)
            }
        };
        let strict = match get(pairs, "diagnostics.strict").unwrap_or("false") {
            "true" => true,
            "false" => false,
            other => return Err(CliError::config(format!("`diagnostics.strict`: expected true or false, got `{other}`"))),
        };
        Ok(Self {
            field,
            n,
            speed,
            init,
            nodes,
            order,
            control,
            output_dt,
            out_dir: PathBuf::from(get(pairs, "output.dir").unwrap_or("out")),
            csv_name: get(pairs, "output.csv").unwrap_or("series.csv").to_string(),
            summary_name: get(pairs, "output.summary").unwrap_or("summary.txt").to_string(),
            window,
            strict,
        })
    }
}

/// A base configuration plus parameter lists to take the cross product of.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub base: Pairs,
    pub axes: Vec<(String, Vec<String>)>,
    pub cap: usize,
}

impl SweepConfig {
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut base = Vec::new();
        let mut axes = Vec::new();
        let mut cap = DEFAULT_SWEEP_CAP;
        for (k, v) in parse_pairs(text)? {
            if k == "sweep.cap" {
                cap = v.parse().map_err(|_| CliError::config(format!("`sweep.cap`: cannot parse `{v}`")))?;
            } else if let Some(key) = k.strip_prefix("sweep.") {
                if !KEYS.contains(&key) {
                    return Err(CliError::config(format!("sweep over unknown key `{key}`")));
                }
                let values: Vec<String> =
                    v.split('|').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                if values.is_empty() {
                    return Err(CliError::config(format!("empty sweep list for `{key}`")));
                }
                axes.push((key.to_string(), values));
            } else {
                base.push((k, v));
            }
        }
        if axes.is_empty() {
            return Err(CliError::config("no `sweep.<key>` lists given"));
        }
        if let Some((k, _)) = axes.iter().find(|(k, _)| base.iter().any(|(b, _)| b == k)) {
            return Err(CliError::config(format!("`{k}` is both fixed and swept")));
        }
        Ok(Self { base, axes, cap })
    }

    pub fn size(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    /// The swept `(key, value)` assignment of every combination, first axis slowest.
    pub fn combinations(&self) -> Result<Vec<Pairs>, CliError> {
        let size = self.size();
        if size > self.cap {
            return Err(CliError::config(format!("sweep has {size} combinations, cap is {}", self.cap)));
        }
        let mut out: Vec<Pairs> = vec![Vec::new()];
        for (key, values) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push((key.clone(), v.clone()));
                        p
                    })
                })
                .collect();
        }
        Ok(out)
    }

    pub fn merged(&self, assignment: &Pairs) -> Pairs {
        let mut pairs = self.base.clone();
        pairs.extend(assignment.iter().cloned());
        pairs
    }
}
