//! Ambient hyperbolic spaces `KH^n` in geodesic polar coordinates.
//!
//! The metric is `dρ² + sinh²ρ · e_{cosh²ρ}` where `e_λ` is the Berger metric on
//! `S^m` obtained by scaling the Hopf fibre directions by `λ`. For `K = R` there
//! are no fibres and `e` is the round metric.
//!
//! Curvature sign convention: [`curvature_tensor`] returns the raw value of the
//! closed-form expression, which gives `R̄(X,Y,Y,X) = +1` for an orthonormal pair
//! in `RH^n`. The sectional curvature is its negative, see [`sectional_curvature`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{HypflowError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    R,
    C,
    H,
}

impl FieldKind {
    /// `dim_R K - 1`.
    pub fn a(self) -> usize {
        match self {
            FieldKind::R => 0,
            FieldKind::C => 1,
            FieldKind::H => 3,
        }
    }

    pub fn min_dimension(self) -> usize {
        match self {
            FieldKind::R => 3,
            FieldKind::C | FieldKind::H => 2,
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FieldKind::R => "R",
            FieldKind::C => "C",
            FieldKind::H => "H",
        };
        f.write_str(s)
    }
}

impl FromStr for FieldKind {
    type Err = HypflowError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "R" | "r" => Ok(FieldKind::R),
            "C" | "c" => Ok(FieldKind::C),
            "H" | "h" | "Q" | "q" => Ok(FieldKind::H),
            other => Err(HypflowError::Parse(format!("unknown field `{other}` (expected R, C or H)"))),
        }
    }
}

/// The space `KH^n` together with the derived integers `a` and `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AmbientSpace {
    field: FieldKind,
    n: usize,
    a: usize,
    m: usize,
}

impl AmbientSpace {
    pub fn new(field: FieldKind, n: usize) -> Result<Self> {
        let min = field.min_dimension();
        if n < min {
            return Err(HypflowError::DimensionTooSmall { field, n, min });
        }
        let a = field.a();
        Ok(Self { field, n, a, m: (a + 1) * n - 1 })
    }

    pub fn field(&self) -> FieldKind {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> usize {
        self.a
    }

    /// Real dimension of a hypersurface.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Real dimension of the ambient space.
    pub fn real_dim(&self) -> usize {
        self.m + 1
    }

    /// Mean curvature of a horosphere, `m + a`.
    pub fn horosphere_mean_curvature(&self) -> f64 {
        (self.m + self.a) as f64
    }

    /// Mean curvature of the geodesic sphere of radius `rho`:
    /// `m coth ρ + a tanh ρ`.
    pub fn hbar(&self, rho: f64) -> Result<f64> {
        check_radius(rho)?;
        Ok(self.hbar_unchecked(rho))
    }

    pub(crate) fn hbar_unchecked(&self, rho: f64) -> f64 {
        self.m as f64 / rho.tanh() + self.a as f64 * rho.tanh()
    }

    /// `Ĥ(ρ) - (m + a)`, evaluated without cancellation for large `ρ`.
    pub fn hbar_excess(&self, rho: f64) -> f64 {
        self.m as f64 * coth_minus_one(rho) + self.a as f64 * tanh_minus_one(rho)
    }

    /// `dĤ/dρ = -m / sinh²ρ + a / cosh²ρ`.
    pub fn hbar_derivative(&self, rho: f64) -> f64 {
        let (s, c) = (rho.sinh(), rho.cosh());
        -(self.m as f64) / (s * s) + self.a as f64 / (c * c)
    }

    /// Area of the geodesic sphere of radius `rho`: `ω_m sinh^m ρ cosh^a ρ`
    /// with `ω_m = vol(S^m)`.
    pub fn sphere_area(&self, rho: f64) -> Result<f64> {
        check_radius(rho)?;
        Ok(sphere_volume(self.m) * rho.sinh().powi(self.m as i32) * rho.cosh().powi(self.a as i32))
    }

    /// Natural log of [`AmbientSpace::sphere_area`], finite for radii where the
    /// area itself overflows.
    pub fn ln_sphere_area(&self, rho: f64) -> Result<f64> {
        check_radius(rho)?;
        Ok(sphere_volume(self.m).ln() + self.m as f64 * ln_sinh(rho) + self.a as f64 * ln_cosh(rho))
    }

    /// Ricci eigenvalue on unit vectors: the space is Einstein with `Ric = -(m+3a) ḡ`.
    pub fn ricci(&self) -> f64 {
        -((self.m + 3 * self.a) as f64)
    }

    /// The complex structures `J_1..J_a` acting on `K^n = R^{(a+1)n}`.
    pub fn complex_structures(&self) -> Vec<ComplexStructure> {
        (0..self.a).map(|index| ComplexStructure { field: self.field, index }).collect()
    }
}

impl fmt::Display for AmbientSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}H^{}", self.field, self.n)
    }
}

pub fn make_ambient(field: FieldKind, n: usize) -> Result<AmbientSpace> {
    AmbientSpace::new(field, n)
}

pub fn ambient_ricci(amb: &AmbientSpace) -> f64 {
    amb.ricci()
}

pub fn hbar(rho: f64, amb: &AmbientSpace) -> Result<f64> {
    amb.hbar(rho)
}

pub fn sphere_area(rho: f64, amb: &AmbientSpace) -> Result<f64> {
    amb.sphere_area(rho)
}

fn check_radius(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(HypflowError::Domain(format!("radius must be positive and finite, got {rho}")))
    }
}

/// Volume of the unit round sphere `S^k`.
pub fn sphere_volume(k: usize) -> f64 {
    let mut vol = if k % 2 == 0 { 2.0 } else { 2.0 * PI };
    let mut j = if k % 2 == 0 { 0 } else { 1 };
    while j < k {
        j += 2;
        vol *= 2.0 * PI / (j - 1) as f64;
    }
    vol
}

/// `coth x - 1 = 2 / (e^{2x} - 1)`.
pub fn coth_minus_one(x: f64) -> f64 {
    2.0 / (2.0 * x).exp_m1()
}

/// `tanh x - 1 = -2 / (e^{2x} + 1)`.
pub fn tanh_minus_one(x: f64) -> f64 {
    -2.0 / ((2.0 * x).exp() + 1.0)
}

pub(crate) fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

pub(crate) fn ln_cosh(x: f64) -> f64 {
    x.abs() - std::f64::consts::LN_2 + (-2.0 * x.abs()).exp().ln_1p()
}

/// One of the complex structures of `K^n`, realised as left multiplication by
/// `i` (for `C`) or by `i`, `j`, `k` (for `H`) in each coordinate slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexStructure {
    field: FieldKind,
    index: usize,
}

impl ComplexStructure {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self.field {
            FieldKind::R => unreachable!("RH^n carries no complex structure"),
            FieldKind::C => x.chunks_exact(2).flat_map(|z| [-z[1], z[0]]).collect(),
            FieldKind::H => x
                .chunks_exact(4)
                .flat_map(|q| match self.index {
                    0 => [-q[1], q[0], -q[3], q[2]],
                    1 => [-q[2], q[3], q[0], -q[1]],
                    _ => [-q[3], -q[2], q[1], q[0]],
                })
                .collect(),
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// The ambient curvature tensor `R̄(X,Y,Z,W)` at a point, for tangent vectors
/// given in an orthonormal frame adapted to the complex structures.
pub fn curvature_tensor(amb: &AmbientSpace, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
    let dim = amb.real_dim();
    for v in [x, y, z, w] {
        if v.len() != dim {
            return Err(HypflowError::Precondition(format!(
                "tangent vector has {} components, expected {dim}",
                v.len()
            )));
        }
    }
    let mut value = -dot(x, z) * dot(y, w) + dot(x, w) * dot(y, z);
    for j in amb.complex_structures() {
        let (jy, jz, jw) = (j.apply(y), j.apply(z), j.apply(w));
        value += -dot(x, &jz) * dot(y, &jw) + dot(x, &jw) * dot(y, &jz);
        value -= 2.0 * dot(x, &jy) * dot(z, &jw);
    }
    Ok(value)
}

const ORTHONORMAL_TOL: f64 = 1e-10;

/// `R̄(X,Y,Y,X)` for an orthonormal pair. Lies in `[1, 4]`, equal to `1` for `K = R`.
pub fn ambient_sectional(amb: &AmbientSpace, x: &[f64], y: &[f64]) -> Result<f64> {
    let (xx, yy, xy) = (dot(x, x), dot(y, y), dot(x, y));
    if (xx - 1.0).abs() > ORTHONORMAL_TOL || (yy - 1.0).abs() > ORTHONORMAL_TOL || xy.abs() > ORTHONORMAL_TOL {
        return Err(HypflowError::Precondition(format!(
            "pair is not orthonormal (|X|² = {xx}, |Y|² = {yy}, <X,Y> = {xy})"
        )));
    }
    curvature_tensor(amb, x, y, y, x)
}

/// Same value as [`ambient_sectional`] computed from the pairings `ḡ(X, J_i Y)`.
pub fn sectional_from_pairings(pairings: &[f64]) -> f64 {
    1.0 + 3.0 * pairings.iter().map(|p| p * p).sum::<f64>()
}

/// Sectional curvature of the plane spanned by an orthonormal pair, in `[-4, -1]`.
pub fn sectional_curvature(amb: &AmbientSpace, x: &[f64], y: &[f64]) -> Result<f64> {
    ambient_sectional(amb, x, y).map(|r| -r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_integers() {
        let r3 = make_ambient(FieldKind::R, 3).unwrap();
        assert_eq!((r3.a(), r3.m()), (0, 2));
        let c2 = make_ambient(FieldKind::C, 2).unwrap();
        assert_eq!((c2.a(), c2.m()), (1, 3));
        let h2 = make_ambient(FieldKind::H, 2).unwrap();
        assert_eq!((h2.a(), h2.m()), (3, 7));
    }

    #[test]
    fn dimension_hypotheses() {
        assert!(matches!(
            make_ambient(FieldKind::R, 2),
            Err(HypflowError::DimensionTooSmall { n: 2, min: 3, .. })
        ));
        assert!(make_ambient(FieldKind::C, 1).is_err());
        assert!(make_ambient(FieldKind::H, 2).is_ok());
    }

    #[test]
    fn ricci_values() {
        let r = |f, n| ambient_ricci(&make_ambient(f, n).unwrap());
        assert_eq!(r(FieldKind::R, 3), -2.0);
        assert_eq!(r(FieldKind::C, 2), -6.0);
        assert_eq!(r(FieldKind::H, 2), -16.0);
    }

    #[test]
    fn hbar_values() {
        let r3 = make_ambient(FieldKind::R, 3).unwrap();
        let c2 = make_ambient(FieldKind::C, 2).unwrap();
        // high-precision evaluations of the closed form
        assert!((r3.hbar(1.0).unwrap() - 2.626_070_570_998_662_6).abs() < 1e-14);
        assert!((c2.hbar(1.0).unwrap() - 4.700_700_012_453_759).abs() < 1e-14);
        assert!((c2.hbar(40.0).unwrap() - 4.0).abs() < 1e-14);
        assert!(r3.hbar(0.0).is_err());
        assert!(r3.hbar(-1.0).is_err());
    }

    #[test]
    fn hbar_excess_is_stable() {
        let c2 = make_ambient(FieldKind::C, 2).unwrap();
        for rho in [0.5, 1.0, 3.0, 8.0] {
            let direct = c2.hbar(rho).unwrap() - 4.0;
            assert!((c2.hbar_excess(rho) - direct).abs() < 1e-13);
        }
        // 3·2e^{-2ρ} - 2e^{-2ρ} = 4e^{-2ρ} to leading order
        let rho: f64 = 30.0;
        let lead = 4.0 * (-2.0 * rho).exp();
        assert!((c2.hbar_excess(rho) / lead - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_areas() {
        let r3 = make_ambient(FieldKind::R, 3).unwrap();
        let c2 = make_ambient(FieldKind::C, 2).unwrap();
        let rho: f64 = 0.7;
        assert!((r3.sphere_area(rho).unwrap() - 4.0 * PI * rho.sinh().powi(2)).abs() < 1e-13);
        assert!((c2.sphere_area(1.0).unwrap() - 49.437_332_996_822_22).abs() < 1e-11);
        assert!((c2.ln_sphere_area(1.0).unwrap() - c2.sphere_area(1.0).unwrap().ln()).abs() < 1e-14);
        let tiny = r3.sphere_area(1e-6).unwrap();
        assert!((tiny / (4.0 * PI * 1e-12) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unit_sphere_volumes() {
        assert!((sphere_volume(0) - 2.0).abs() < 1e-15);
        assert!((sphere_volume(1) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-14);
        assert!((sphere_volume(7) - PI.powi(4) / 3.0).abs() < 1e-13);
    }

    #[test]
    fn sectional_real_is_one() {
        let amb = make_ambient(FieldKind::R, 3).unwrap();
        let x = [1.0, 0.0, 0.0];
        let y = [0.0, 0.6, 0.8];
        assert!((ambient_sectional(&amb, &x, &y).unwrap() - 1.0).abs() < 1e-15);
        assert!((sectional_curvature(&amb, &x, &y).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn sectional_complex_cases() {
        let amb = make_ambient(FieldKind::C, 2).unwrap();
        let x = [1.0, 0.0, 0.0, 0.0];
        let j = amb.complex_structures()[0];
        let jx = j.apply(&x);
        assert!((ambient_sectional(&amb, &x, &jx).unwrap() - 4.0).abs() < 1e-15);
        // Y orthogonal to both X and J X
        let y = [0.0, 0.0, 1.0, 0.0];
        assert!((ambient_sectional(&amb, &x, &y).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_orthonormal_pair_rejected() {
        let amb = make_ambient(FieldKind::R, 3).unwrap();
        assert!(ambient_sectional(&amb, &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).is_err());
        assert!(ambient_sectional(&amb, &[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn quaternionic_structures_are_complex_structures() {
        let amb = make_ambient(FieldKind::H, 2).unwrap();
        let x: Vec<f64> = (0..8).map(|i| (i as f64 * 0.37).sin()).collect();
        for j in amb.complex_structures() {
            let jx = j.apply(&x);
            let jjx = j.apply(&jx);
            assert!(x.iter().zip(&jjx).all(|(a, b)| (a + b).abs() < 1e-15));
            assert!(dot(&x, &jx).abs() < 1e-15);
        }
    }

    #[test]
    fn ricci_is_trace_of_curvature() {
        for (field, n) in [(FieldKind::R, 3), (FieldKind::R, 5), (FieldKind::C, 2), (FieldKind::C, 3), (FieldKind::H, 2)] {
            let amb = make_ambient(field, n).unwrap();
            let dim = amb.real_dim();
            let x: Vec<f64> = (0..dim).map(|i| ((i + 1) as f64).sqrt().sin()).collect();
            let norm = dot(&x, &x).sqrt();
            let x: Vec<f64> = x.iter().map(|v| v / norm).collect();
            let mut ric = 0.0;
            for i in 0..dim {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                ric -= curvature_tensor(&amb, &x, &e, &e, &x).unwrap();
            }
            assert!((ric - amb.ricci()).abs() < 1e-12, "{amb}: {ric}");
        }
    }
}
