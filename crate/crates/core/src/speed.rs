//! Speed functions `ψ` and their structural validation.
//!
//! Admissible speeds satisfy, for `x > 0`:
//!
//! * i) `ψ(0⁺) = 0`, `ψ > 0`, `ψ' > 0`
//! * ii) `x ψ'(x) / ψ(x) ≤ 1`
//! * iii) `ψ'' ψ - 2 ψ'² ≤ 0` (equivalently `1/ψ` is convex)

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{HypflowError, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Imcf,
    Power(f64),
    Log1p,
    PowerSum(Vec<(f64, f64)>),
    Expm1(f64),
    Custom { f: ScalarFn, df: ScalarFn, d2f: ScalarFn },
}

/// A speed function with closed-form first and second derivatives.
#[derive(Clone)]
pub struct SpeedFunction {
    label: String,
    kind: Kind,
}

impl fmt::Debug for SpeedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpeedFunction").field("label", &self.label).finish()
    }
}

impl fmt::Display for SpeedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl SpeedFunction {
    /// `ψ(x) = x`, inverse mean curvature flow.
    pub fn imcf() -> Self {
        Self { label: "imcf".into(), kind: Kind::Imcf }
    }

    /// `ψ(x) = x^p`. Any `p > 0` is accepted here; `p > 1` fails validation.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(HypflowError::Parse(format!("power exponent must be positive, got {p}")));
        }
        Ok(Self { label: format!("power:{p}"), kind: Kind::Power(p) })
    }

    /// `ψ(x) = ln(1 + x)`.
    pub fn log1p() -> Self {
        Self { label: "log1p".into(), kind: Kind::Log1p }
    }

    /// `ψ(x) = Σ c_i x^{p_i}` with `c_i > 0`, `p_i > 0`.
    pub fn power_sum(terms: Vec<(f64, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(HypflowError::Parse("powersum needs at least one term".into()));
        }
        for &(c, p) in &terms {
            if !(c > 0.0 && c.is_finite() && p > 0.0 && p.is_finite()) {
                return Err(HypflowError::Parse(format!("powersum term ({c}, {p}) needs c > 0 and p > 0")));
            }
        }
        let body: Vec<String> = terms.iter().map(|(c, p)| format!("{c},{p}")).collect();
        Ok(Self { label: format!("powersum:{}", body.join(";")), kind: Kind::PowerSum(terms) })
    }

    /// `ψ(x) = (e^{s x} - 1) / s`. Never admissible (violates ii)); kept as a
    /// negative control.
    pub fn expm1(s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(HypflowError::Parse(format!("expm1 scale must be positive, got {s}")));
        }
        Ok(Self { label: format!("expm1:{s}"), kind: Kind::Expm1(s) })
    }

    /// A user-supplied speed from closures for `ψ`, `ψ'` and `ψ''`.
    pub fn custom<F, D, D2>(label: impl Into<String>, f: F, df: D, d2f: D2) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            kind: Kind::Custom { f: Arc::new(f), df: Arc::new(df), d2f: Arc::new(d2f) },
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Imcf => x,
            Kind::Power(p) => x.powf(*p),
            Kind::Log1p => x.ln_1p(),
            Kind::PowerSum(t) => t.iter().map(|(c, p)| c * x.powf(*p)).sum(),
            Kind::Expm1(s) => (s * x).exp_m1() / s,
            Kind::Custom { f, .. } => f(x),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Imcf => 1.0,
            Kind::Power(p) => p * x.powf(p - 1.0),
            Kind::Log1p => 1.0 / (1.0 + x),
            Kind::PowerSum(t) => t.iter().map(|(c, p)| c * p * x.powf(p - 1.0)).sum(),
            Kind::Expm1(s) => (s * x).exp(),
            Kind::Custom { df, .. } => df(x),
        }
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Imcf => 0.0,
            Kind::Power(p) => p * (p - 1.0) * x.powf(p - 2.0),
            Kind::Log1p => -1.0 / ((1.0 + x) * (1.0 + x)),
            Kind::PowerSum(t) => t.iter().map(|(c, p)| c * p * (p - 1.0) * x.powf(p - 2.0)).sum(),
            Kind::Expm1(s) => s * (s * x).exp(),
            Kind::Custom { d2f, .. } => d2f(x),
        }
    }
}

impl FromStr for SpeedFunction {
    type Err = HypflowError;

    /// Parses `imcf`, `log1p`, `power:p`, `powersum:c1,p1;c2,p2` and `expm1:s`.
    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (spec, None),
        };
        let number = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| HypflowError::Parse(format!("bad number `{s}` in speed spec `{spec}`")))
        };
        match (name, args) {
            ("imcf", None) => Ok(Self::imcf()),
            ("log1p", None) => Ok(Self::log1p()),
            ("power", Some(a)) => Self::power(number(a)?),
            ("expm1", Some(a)) => Self::expm1(number(a)?),
            ("powersum", Some(a)) => {
                let mut terms = Vec::new();
                for term in a.split(';').filter(|t| !t.trim().is_empty()) {
                    let (c, p) = term
                        .split_once(',')
                        .ok_or_else(|| HypflowError::Parse(format!("powersum term `{term}` is not `c,p`")))?;
                    terms.push((number(c)?, number(p)?));
                }
                Self::power_sum(terms)
            }
            _ => Err(HypflowError::Parse(format!("unknown speed spec `{spec}`"))),
        }
    }
}

pub fn parse_speed(spec: &str) -> Result<SpeedFunction> {
    spec.parse()
}

/// The structural condition a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `ψ(0⁺) = 0`, part of i).
    ZeroLimit,
    /// `ψ > 0` and `ψ' > 0`, part of i).
    Positivity,
    /// ii) `x ψ'/ψ ≤ 1`.
    Elasticity,
    /// iii) `ψ'' ψ - 2 ψ'² ≤ 0`.
    Convexity,
}

impl Condition {
    pub fn id(self) -> &'static str {
        match self {
            Condition::ZeroLimit => "i:limit",
            Condition::Positivity => "i",
            Condition::Elasticity => "ii",
            Condition::Convexity => "iii",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::ZeroLimit => "i) psi(0+) = 0",
            Condition::Positivity => "i) psi > 0, psi' > 0",
            Condition::Elasticity => "ii) x psi'/psi <= 1",
            Condition::Convexity => "iii) psi'' psi - 2 psi'^2 <= 0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    pub x: f64,
    pub lhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub label: String,
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn violates(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }

    pub fn count(&self, condition: Condition) -> usize {
        self.violations.iter().filter(|v| v.condition == condition).count()
    }
}

pub const CONDITION_TOL: f64 = 1e-10;
pub const ZERO_LIMIT_TOL: f64 = 1e-6;
pub const GRID_MIN: f64 = 1e-4;
pub const GRID_MAX: f64 = 1e3;

/// 200 log-spaced points on `[1e-4, 1e3]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(GRID_MIN, GRID_MAX, 200)
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Estimates `ψ(0⁺)` by Aitken extrapolation of `ψ(10^{-k})`, `k = 12, 13, 14`.
pub fn zero_limit(psi: &SpeedFunction) -> Result<f64> {
    let xs = [1e-12, 1e-13, 1e-14];
    let mut v = [0.0; 3];
    for (slot, &x) in v.iter_mut().zip(&xs) {
        *slot = psi.eval(x);
        if !slot.is_finite() {
            return Err(HypflowError::NonFiniteSpeed { label: psi.label.clone(), x });
        }
    }
    let d1 = v[2] - v[1];
    let d2 = v[2] - 2.0 * v[1] + v[0];
    if d2 == 0.0 {
        return Ok(v[2]);
    }
    Ok(v[2] - d1 * d1 / d2)
}

/// Checks conditions i)–iii) pointwise on `grid` and `ψ(0⁺) = 0` by extrapolation.
pub fn validate_speed(psi: &SpeedFunction, grid: &[f64]) -> Result<ValidationReport> {
    if grid.is_empty() {
        return Err(HypflowError::Precondition("validation grid is empty".into()));
    }
    if grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(HypflowError::Precondition("validation grid must be strictly positive".into()));
    }
    let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().cloned().fold(0.0, f64::max);
    if lo > GRID_MIN * (1.0 + 1e-12) || hi < GRID_MAX * (1.0 - 1e-12) {
        return Err(HypflowError::Precondition(format!(
            "validation grid spans [{lo:e}, {hi:e}], needs at least [{GRID_MIN:e}, {GRID_MAX:e}]"
        )));
    }

    let mut violations = Vec::new();
    let limit = zero_limit(psi)?;
    if limit.abs() > ZERO_LIMIT_TOL {
        violations.push(Violation { condition: Condition::ZeroLimit, x: 0.0, lhs: limit });
    }
    for &x in grid {
        let (f, df, d2f) = (psi.eval(x), psi.deriv(x), psi.deriv2(x));
        if !(f.is_finite() && df.is_finite() && d2f.is_finite()) {
            return Err(HypflowError::NonFiniteSpeed { label: psi.label.clone(), x });
        }
        if f <= 0.0 || df <= 0.0 {
            violations.push(Violation { condition: Condition::Positivity, x, lhs: f.min(df) });
            continue;
        }
        let elasticity = x * df / f;
        if elasticity > 1.0 + CONDITION_TOL {
            violations.push(Violation { condition: Condition::Elasticity, x, lhs: elasticity });
        }
        let convexity = d2f * f - 2.0 * df * df;
        if convexity > CONDITION_TOL {
            violations.push(Violation { condition: Condition::Convexity, x, lhs: convexity });
        }
    }
    Ok(ValidationReport { label: psi.label.clone(), passed: violations.is_empty(), violations })
}
