//! Independent reference computations for tests.
//!
//! Nothing here is shared with the `hypflow` crate: derivatives use one-sided
//! boundary stencils instead of mirror ghosts, integrals use Gregory end
//! corrections, and the limit formulas for `K != R` are evaluated in the
//! coordinate `η ∈ [0, π/2]` on `S^{2a+1} ⊂ K²` rather than on the quotient.

use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    GridTooSmall { len: usize, min: usize },
    BadOrder(u8),
    Unsupported(String),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GridTooSmall { len, min } => write!(f, "grid of {len} samples, need at least {min}"),
            Self::BadOrder(o) => write!(f, "derivative order {o} not in {{1, 2}}"),
            Self::Unsupported(s) => write!(f, "unsupported: {s}"),
        }
    }
}

impl std::error::Error for OracleError {}

pub type Result<T> = std::result::Result<T, OracleError>;

const FD_MIN: usize = 6;

/// Fourth-order finite differences on a uniform grid: centred five-point in
/// the interior, one-sided at the first and last two samples.
pub fn fd_derivative(u: &[f64], h: f64, order: u8) -> Result<Vec<f64>> {
    let n = u.len();
    if n < FD_MIN {
        return Err(OracleError::GridTooSmall { len: n, min: FD_MIN });
    }
    let dot = |coef: &[f64], start: usize, sign: f64| -> f64 {
        coef.iter()
            .enumerate()
            .map(|(k, c)| c * if sign > 0.0 { u[start + k] } else { u[start - k] })
            .sum()
    };
    match order {
        1 => {
            const B0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
            const B1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
            let s = 12.0 * h;
            let mut out = vec![0.0; n];
            out[0] = dot(&B0, 0, 1.0) / s;
            out[1] = dot(&B1, 0, 1.0) / s;
            // Mirrored stencils change sign for odd derivatives.
            out[n - 1] = -dot(&B0, n - 1, -1.0) / s;
            out[n - 2] = -dot(&B1, n - 1, -1.0) / s;
            for i in 2..n - 2 {
                out[i] = (8.0 * (u[i + 1] - u[i - 1]) - (u[i + 2] - u[i - 2])) / s;
            }
            Ok(out)
        }
        2 => {
            const B0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
            const B1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
            let s = 12.0 * h * h;
            let mut out = vec![0.0; n];
            out[0] = dot(&B0, 0, 1.0) / s;
            out[1] = dot(&B1, 0, 1.0) / s;
            out[n - 1] = dot(&B0, n - 1, -1.0) / s;
            out[n - 2] = dot(&B1, n - 1, -1.0) / s;
            for i in 2..n - 2 {
                out[i] = (16.0 * (u[i + 1] + u[i - 1]) - (u[i + 2] + u[i - 2]) - 30.0 * u[i]) / s;
            }
            Ok(out)
        }
        o => Err(OracleError::BadOrder(o)),
    }
}

/// Composite trapezoid with Gregory end corrections through fourth
/// differences; sixth order on smooth integrands.
pub fn quad(samples: &[f64], h: f64) -> f64 {
    const GREGORY: [f64; 4] = [1.0 / 12.0, 1.0 / 24.0, 19.0 / 720.0, 3.0 / 160.0];
    let n = samples.len();
    assert!(n >= 2 * GREGORY.len() + 2, "quad needs at least {} samples", 2 * GREGORY.len() + 2);
    let trapezoid = samples.iter().sum::<f64>() - 0.5 * (samples[0] + samples[n - 1]);
    let mut correction = 0.0;
    for (q, g) in GREGORY.iter().enumerate() {
        let k = q + 1;
        // Δ^k f_0 and ∇^k f_{n-1}
        let (mut fwd, mut bwd, mut binom) = (0.0, 0.0, 1.0);
        for i in 0..=k {
            let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
            fwd += sign * binom * samples[i];
            bwd += sign * binom * samples[n - 1 - (k - i)];
            binom = binom * (k - i) as f64 / (i + 1) as f64;
        }
        let left_sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        correction += g * (left_sign * fwd - bwd);
    }
    h * (trapezoid + correction)
}

/// Uniform grid of `nodes` points on `[a, b]`.
pub fn linspace(a: f64, b: f64, nodes: usize) -> (Vec<f64>, f64) {
    let h = (b - a) / (nodes - 1) as f64;
    ((0..nodes).map(|i| if i == nodes - 1 { b } else { a + h * i as f64 }).collect(), h)
}

/// Volume of the unit `k`-sphere by the two-step recurrence.
pub fn sphere_volume(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k - 1) as f64 * sphere_volume(k - 2),
    }
}

/// Least-squares line through `(x, y)` from centred sums: `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xm) * (a - xm)).sum();
    let slope = sxy / sxx;
    (slope, ym - slope * xm)
}

/// Exponential decay rate of a positive series: minus the slope of `ln y`.
pub fn log_linear_rate(t: &[f64], y: &[f64]) -> f64 {
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    -linear_fit(t, &ly).0
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Constant(f64),
    Legendre { eps: f64, l: usize },
    Cosine { eps: f64, k: f64 },
    /// `f = -ln(1 + ε cos θ)`, so `e^{-f}` is a first eigenfunction plus a constant.
    FirstEigen { eps: f64 },
    /// `f = ε sin²θ cos θ`, odd about the equator.
    Tilted { eps: f64 },
}

/// A function of the polar angle `θ ∈ [0, π]` with closed-form derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticFamily {
    pub name: String,
    shape: Shape,
}

/// `(P_l, P_l', P_l'')` at `x` by the three-term recurrence.
fn legendre(l: usize, x: f64) -> (f64, f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    let (mut s0, mut s1) = (0.0, 0.0);
    if l == 0 {
        return (1.0, 0.0, 0.0);
    }
    for k in 1..l {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        let d2 = ((2.0 * kf + 1.0) * (p1 + x * d1) - kf * d0) / (kf + 1.0);
        let s2 = ((2.0 * kf + 1.0) * (2.0 * d1 + x * s1) - kf * s0) / (kf + 1.0);
        (p0, p1, d0, d1, s0, s1) = (p1, p2, d1, d2, s1, s2);
    }
    (p1, d1, s1)
}

impl AnalyticFamily {
    pub fn constant(c: f64) -> Self {
        Self { name: format!("constant({c})"), shape: Shape::Constant(c) }
    }

    /// `ε P_l(cos θ)`.
    pub fn legendre(eps: f64, l: usize) -> Self {
        Self { name: format!("legendre({eps},{l})"), shape: Shape::Legendre { eps, l } }
    }

    /// `ε cos kθ`.
    pub fn cosine(eps: f64, k: f64) -> Self {
        Self { name: format!("cosine({eps},{k})"), shape: Shape::Cosine { eps, k } }
    }

    pub fn first_eigen(eps: f64) -> Self {
        assert!(eps.abs() < 1.0);
        Self { name: format!("first_eigen({eps})"), shape: Shape::FirstEigen { eps } }
    }

    pub fn tilted(eps: f64) -> Self {
        Self { name: format!("tilted({eps})"), shape: Shape::Tilted { eps } }
    }

    /// Every family used by the equality tests.
    pub fn catalogue() -> Vec<Self> {
        vec![
            Self::constant(0.4),
            Self::legendre(0.3, 2),
            Self::legendre(0.5, 2),
            Self::legendre(0.2, 3),
            Self::legendre(0.25, 4),
            Self::cosine(0.3, 1.0),
            Self::cosine(0.3, 2.0),
            Self::first_eigen(0.2),
            Self::tilted(0.4),
        ]
    }

    /// Whether `f(π - θ) = f(θ)`.
    pub fn is_even_about_equator(&self) -> bool {
        match self.shape {
            Shape::Constant(_) => true,
            Shape::Legendre { l, .. } => l % 2 == 0,
            Shape::Cosine { k, .. } => (k.round() as i64) % 2 == 0,
            Shape::FirstEigen { eps } => eps == 0.0,
            Shape::Tilted { eps } => eps == 0.0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// `(f, f', f'')` in `θ`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (s, c) = t.sin_cos();
        match self.shape {
            Shape::Constant(v) => (v, 0.0, 0.0),
            Shape::Legendre { eps, l } => {
                let (p, dp, ddp) = legendre(l, c);
                (eps * p, -eps * s * dp, eps * (s * s * ddp - c * dp))
            }
            Shape::Cosine { eps, k } => {
                let (sk, ck) = (k * t).sin_cos();
                (eps * ck, -eps * k * sk, -eps * k * k * ck)
            }
            Shape::FirstEigen { eps } => {
                let q = 1.0 + eps * c;
                (-q.ln(), eps * s / q, eps * c / q + eps * eps * s * s / (q * q))
            }
            Shape::Tilted { eps } => {
                // sin²θ cos θ = cos θ - cos³θ
                let d = -s + 3.0 * c * c * s;
                let dd = -c + 6.0 * c * (-s) * s + 3.0 * c * c * c;
                (eps * (c - c * c * c), eps * d, eps * dd)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    R,
    C,
    H,
}

impl Field {
    pub fn a(self) -> usize {
        match self {
            Field::R => 0,
            Field::C => 1,
            Field::H => 3,
        }
    }
}

/// Both limit masses of the radial profile `τ + f`; `hawking` only for `K = R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassLimits {
    pub hawking: Option<f64>,
    pub brown_york: f64,
}

/// `lim_{x→0} u'(x)/tan x` style quotient: `u'(x) * g(x)` where `g` has a
/// simple pole at an end point; at the pole itself the quotient is `u''`.
fn singular_quotient(du: f64, ddu: f64, factor: f64, at_pole: bool) -> f64 {
    if at_pole {
        ddu
    } else {
        du * factor
    }
}

/// Brute-force evaluation of both limit displays for the profile `τ + f`
/// using only [`fd_derivative`] and [`quad`].
///
/// `K = R`: polar angle on round `S^m`, `Δu = u'' + (m-1) cot θ u'`, Hessian
/// eigenvalues `u''` once and `cot θ u'` with multiplicity `m - 1`.
///
/// `K ≠ R`, `n = 2`: `S^{2a+1} = {(cos η p, sin η q)}`, `p, q ∈ S^a`, invariant
/// functions depend on `η = θ/2` only, `Δu = u_ηη + a (cot η - tan η) u_η`,
/// measure `ω_a² cos^a η sin^a η dη`.
pub fn brute_mass_limits(f: &AnalyticFamily, field: Field, n: usize, nodes: usize) -> Result<MassLimits> {
    let a = field.a();
    let m = (a + 1) * n - 1;
    match field {
        Field::R => {
            let (theta, h) = linspace(0.0, PI, nodes);
            let fv: Vec<f64> = theta.iter().map(|&t| f.value(t)).collect();
            let u: Vec<f64> = fv.iter().map(|x| (-x).exp()).collect();
            let du = fd_derivative(&u, h, 1)?;
            let ddu = fd_derivative(&u, h, 2)?;
            let mf = m as f64;
            let omega = sphere_volume(m - 1);
            let mut vol = Vec::with_capacity(nodes);
            let mut haw = Vec::with_capacity(nodes);
            let mut byi = Vec::with_capacity(nodes);
            for j in 0..nodes {
                let t = theta[j];
                let pole = j == 0 || j == nodes - 1;
                let meas = omega * t.sin().powi(m as i32 - 1);
                let lam_t = singular_quotient(du[j], ddu[j], 1.0 / t.tan(), pole);
                let lam_r = ddu[j];
                let lap = lam_r + (mf - 1.0) * lam_t;
                let hess_sq = lam_r * lam_r + (mf - 1.0) * lam_t * lam_t;
                let traceless = hess_sq - lap * lap / mf;
                vol.push((mf * fv[j]).exp() * meas);
                haw.push(((mf - 2.0) * fv[j]).exp() * traceless * meas);
                byi.push((mf * fv[j]).exp() * (u[j] * lap - 0.5 * mf * du[j] * du[j]) * meas);
            }
            let v = quad(&vol, h);
            Ok(MassLimits {
                hawking: Some(v.powf(-1.0 + 4.0 / mf) * quad(&haw, h)),
                brown_york: v.powf(-1.0 + 2.0 / mf) * quad(&byi, h),
            })
        }
        Field::C | Field::H => {
            if n != 2 {
                return Err(OracleError::Unsupported(format!("K != R needs n = 2, got {n}")));
            }
            let (eta, h) = linspace(0.0, PI / 2.0, nodes);
            let fv: Vec<f64> = eta.iter().map(|&e| f.value(2.0 * e)).collect();
            let u: Vec<f64> = fv.iter().map(|x| (-x).exp()).collect();
            let du = fd_derivative(&u, h, 1)?;
            let ddu = fd_derivative(&u, h, 2)?;
            let (af, k) = (a as f64, (m + a) as f64);
            let omega = sphere_volume(a);
            let mut vol = Vec::with_capacity(nodes);
            let mut byi = Vec::with_capacity(nodes);
            for j in 0..nodes {
                let e = eta[j];
                let (s, c) = e.sin_cos();
                let cot_part = singular_quotient(du[j], ddu[j], c / s, j == 0);
                // tan η u_η → -u_ηη at η = π/2 since u_η changes sign there.
                let tan_part = if j == nodes - 1 { -ddu[j] } else { du[j] * s / c };
                let lap = ddu[j] + af * (cot_part - tan_part);
                let meas = omega * omega * (c * s).powi(a as i32);
                let vk = (k * fv[j]).exp();
                vol.push(vk * meas);
                byi.push(vk * (u[j] * lap - 0.5 * k * du[j] * du[j]) * meas);
            }
            let v = quad(&vol, h);
            Ok(MassLimits { hawking: None, brown_york: v.powf(-1.0 + 2.0 / k) * quad(&byi, h) })
        }
    }
}

/// Projection residual of `e^{-f}` onto `span{1, cos θ}` in `L²(sin^{m-1}θ dθ)`,
/// normalised by `‖e^{-f}‖`, by explicit 2x2 normal equations.
pub fn first_eigen_residual(f: &AnalyticFamily, m: usize, nodes: usize) -> f64 {
    let (theta, h) = linspace(0.0, PI, nodes);
    let w: Vec<f64> = theta.iter().map(|t| t.sin().powi(m as i32 - 1)).collect();
    let u: Vec<f64> = theta.iter().map(|&t| (-f.value(t)).exp()).collect();
    let c: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
    let ip = |x: &[f64], y: &[f64]| quad(&(0..nodes).map(|j| x[j] * y[j] * w[j]).collect::<Vec<_>>(), h);
    let one = vec![1.0; nodes];
    let (g11, g12, g22) = (ip(&one, &one), ip(&one, &c), ip(&c, &c));
    let (r1, r2) = (ip(&one, &u), ip(&c, &u));
    let det = g11 * g22 - g12 * g12;
    let (x1, x2) = ((r1 * g22 - r2 * g12) / det, (g11 * r2 - g12 * r1) / det);
    let res: Vec<f64> = (0..nodes).map(|j| u[j] - x1 - x2 * c[j]).collect();
    (ip(&res, &res) / ip(&u, &u)).sqrt()
}

/// Closed-form `ρ(t)` of a geodesic sphere under inverse mean curvature flow
/// in real hyperbolic space `H^{m+1}`: `sinh ρ = sinh ρ₀ e^{t/m}`.
pub fn imcf_sphere_radius(rho0: f64, m: usize, t: f64) -> f64 {
    (rho0.sinh() * (t / m as f64).exp()).asinh()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_recurrence_matches_closed_forms() {
        for x in [-0.9, -0.3, 0.0, 0.4, 0.8] {
            let (p, d, s) = legendre(2, x);
            assert!((p - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
            assert!((d - 3.0 * x).abs() < 1e-15);
            assert!((s - 3.0).abs() < 1e-15);
            let (p, d, s) = legendre(3, x);
            assert!((p - 0.5 * (5.0 * x * x * x - 3.0 * x)).abs() < 1e-15);
            assert!((d - 0.5 * (15.0 * x * x - 3.0)).abs() < 1e-14);
            assert!((s - 15.0 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_volume(7) - PI.powi(4) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn small_grids_rejected() {
        assert!(matches!(fd_derivative(&[1.0; 5], 0.1, 1), Err(OracleError::GridTooSmall { .. })));
        assert_eq!(fd_derivative(&[1.0; 8], 0.1, 3), Err(OracleError::BadOrder(3)));
    }
}
