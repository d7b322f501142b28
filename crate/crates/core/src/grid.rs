//! The symmetry-reduced coordinate, finite-difference stencils and quadrature.
//!
//! Profiles live on a uniform grid `θ_j = j h`, `h = π/(N-1)`, over `[0, π]`.
//!
//! * `K = R`: `θ` is the polar angle of `S^m` and functions are axisymmetric.
//! * `K ≠ R`, `n = 2`: `θ` is the polar angle of the base `S^{a+1}(1/2)` of the
//!   Hopf fibration `S^a → S^{2a+1} → KP^1`; arc length on the base is `s = θ/2`.
//!
//! Derivatives use even-mirror ghost values at both poles, which is exact
//! reflection symmetry for smooth invariant functions.

use std::f64::consts::PI;

use crate::ambient::{sphere_volume, AmbientSpace, FieldKind};
use crate::error::{HypflowError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum StencilOrder {
    #[default]
    Second,
    Fourth,
}

impl StencilOrder {
    /// Largest eigenvalue magnitude of the discrete `d²/dθ²` times `h²`.
    pub fn spectral_radius(self) -> f64 {
        match self {
            StencilOrder::Second => 4.0,
            StencilOrder::Fourth => 16.0 / 3.0,
        }
    }
}

pub const MIN_NODES: usize = 9;

/// Grid, symmetry-reduction constants and quadrature weights for one ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGrid {
    amb: AmbientSpace,
    h: f64,
    theta: Vec<f64>,
    sin: Vec<f64>,
    cot: Vec<f64>,
    base_dim: usize,
    scale: f64,
    sin_power: usize,
    measure_const: f64,
    weights: Vec<f64>,
}

impl ReducedGrid {
    pub fn new(amb: AmbientSpace, nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(HypflowError::Precondition(format!("grid needs at least {MIN_NODES} nodes, got {nodes}")));
        }
        let (base_dim, scale, sin_power, measure_const) = match amb.field() {
            FieldKind::R => (amb.m(), 1.0, amb.m() - 1, sphere_volume(amb.m() - 1)),
            _ if amb.n() == 2 => {
                let a = amb.a();
                let fibre = sphere_volume(a);
                (a + 1, 0.5, a, fibre * fibre * 0.5f64.powi(a as i32 + 1))
            }
            _ => {
                return Err(HypflowError::Unsupported(format!(
                    "the reduced solver handles K != R only for n = 2, got {amb}"
                )))
            }
        };
        let n = nodes - 1;
        let h = PI / n as f64;
        let mut theta = vec![0.0; nodes];
        let mut sin = vec![0.0; nodes];
        let mut cot = vec![0.0; nodes];
        for j in 0..=n / 2 {
            let t = j as f64 * h;
            let (s, c) = t.sin_cos();
            theta[j] = t;
            theta[n - j] = PI - t;
            sin[j] = s;
            sin[n - j] = s;
            if j > 0 {
                cot[j] = c / s;
                cot[n - j] = -c / s;
            }
        }
        if n % 2 == 0 {
            cot[n / 2] = 0.0;
            sin[n / 2] = 1.0;
            theta[n / 2] = 0.5 * PI;
        }
        let weights = quadrature_weights(&sin, sin_power, measure_const);
        Ok(Self { amb, h, theta, sin, cot, base_dim, scale, sin_power, measure_const, weights })
    }

    pub fn amb(&self) -> &AmbientSpace {
        &self.amb
    }

    pub fn nodes(&self) -> usize {
        self.theta.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn sin(&self) -> &[f64] {
        &self.sin
    }

    /// `cot θ_j`; zero at the poles, where callers apply the L'Hôpital limit.
    pub fn cot(&self) -> &[f64] {
        &self.cot
    }

    /// Dimension `b` of the sphere carrying the reduced coordinate.
    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    /// Arc length per unit `θ` on that sphere (`1` or `1/2`).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn sin_power(&self) -> usize {
        self.sin_power
    }

    /// `∫ F dσ ≈ Σ_j weights[j] F(θ_j)` for invariant `F` on `(S^m, σ)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Exact total measure `vol(S^m)`.
    pub fn total_measure(&self) -> f64 {
        sphere_volume(self.amb.m())
    }

    /// Density of `dσ` against `dθ`.
    pub fn measure_density(&self, theta: f64) -> f64 {
        self.measure_const * theta.sin().powi(self.sin_power as i32)
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn is_pole(&self, j: usize) -> bool {
        j == 0 || j + 1 == self.nodes()
    }

    /// `D_s u` for an invariant function, `s` the arc length on the base sphere.
    pub fn ds(&self, u: &[f64], order: StencilOrder) -> Vec<f64> {
        let mut d = d1(u, self.h, order);
        d.iter_mut().for_each(|x| *x /= self.scale);
        d
    }

    pub fn dss(&self, u: &[f64], order: StencilOrder) -> Vec<f64> {
        let mut d = d2(u, self.h, order);
        let c2 = self.scale * self.scale;
        d.iter_mut().for_each(|x| *x /= c2);
        d
    }

    /// The horizontal Hessian entry `cot(θ) u_θ / c²` (tangential directions on the
    /// base sphere), replaced by `u_θθ / c²` at the poles.
    pub fn tangential(&self, u_theta: &[f64], u_thetatheta: &[f64]) -> Vec<f64> {
        let c2 = self.scale * self.scale;
        (0..self.nodes())
            .map(|j| if self.is_pole(j) { u_thetatheta[j] / c2 } else { self.cot[j] * u_theta[j] / c2 })
            .collect()
    }

    /// Laplacian `Δ_σ u` of an invariant function.
    pub fn laplacian(&self, u: &[f64], order: StencilOrder) -> Vec<f64> {
        let ut = d1(u, self.h, order);
        let utt = d2(u, self.h, order);
        let c2 = self.scale * self.scale;
        let tang = self.tangential(&ut, &utt);
        let k = (self.base_dim - 1) as f64;
        utt.iter().zip(&tang).map(|(q, t)| q / c2 + k * t).collect()
    }
}

fn mirror(u: &[f64], i: isize) -> f64 {
    let n = u.len() as isize - 1;
    let j = if i < 0 {
        -i
    } else if i > n {
        2 * n - i
    } else {
        i
    };
    u[j as usize]
}

/// First derivative with even-mirror ghosts. Odd differences are formed as
/// `u[i+k] - u[i-k]` so that reversing the grid flips the sign exactly.
pub fn d1(u: &[f64], h: f64, order: StencilOrder) -> Vec<f64> {
    let n = u.len() as isize;
    (0..n)
        .map(|i| match order {
            StencilOrder::Second => (mirror(u, i + 1) - mirror(u, i - 1)) / (2.0 * h),
            StencilOrder::Fourth => {
                let near = mirror(u, i + 1) - mirror(u, i - 1);
                let far = mirror(u, i + 2) - mirror(u, i - 2);
                (8.0 * near - far) / (12.0 * h)
            }
        })
        .collect()
}

/// Second derivative with even-mirror ghosts, symmetric grouping.
pub fn d2(u: &[f64], h: f64, order: StencilOrder) -> Vec<f64> {
    let n = u.len() as isize;
    (0..n)
        .map(|i| match order {
            StencilOrder::Second => (mirror(u, i + 1) + mirror(u, i - 1) - 2.0 * u[i as usize]) / (h * h),
            StencilOrder::Fourth => {
                let near = mirror(u, i + 1) + mirror(u, i - 1);
                let far = mirror(u, i + 2) + mirror(u, i - 2);
                (16.0 * near - far - 30.0 * u[i as usize]) / (12.0 * h * h)
            }
        })
        .collect()
}

/// Third derivative, second order.
pub fn d3(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len() as isize;
    (0..n)
        .map(|i| {
            let near = mirror(u, i + 1) - mirror(u, i - 1);
            let far = mirror(u, i + 2) - mirror(u, i - 2);
            (far - 2.0 * near) / (2.0 * h * h * h)
        })
        .collect()
}

/// Weights for `∫_0^π F(θ) C sin^k θ dθ` on the uniform grid.
///
/// Odd `k`: Clenshaw–Curtis in `x = cos θ` applied to `F (1-x²)^{(k-1)/2}`.
/// Even `k`: the trapezoid rule in `θ` applied to `F sin^k θ`, spectrally
/// accurate for even periodic integrands.
pub fn quadrature_weights(sin: &[f64], k: usize, constant: f64) -> Vec<f64> {
    let nodes = sin.len();
    let n = nodes - 1;
    let mut w = vec![0.0; nodes];
    if k % 2 == 1 {
        let cos_table: Vec<f64> = (0..2 * n).map(|r| (PI * r as f64 / n as f64).cos()).collect();
        for j in 0..=n / 2 {
            let mut acc = 0.0;
            for kk in 1..=n / 2 {
                let b = if 2 * kk == n { 1.0 } else { 2.0 };
                acc += b / (4.0 * (kk * kk) as f64 - 1.0) * cos_table[(2 * kk * j) % (2 * n)];
            }
            let c = if j == 0 { 1.0 } else { 2.0 };
            let cc = c / n as f64 * (1.0 - acc);
            let val = cc * sin[j].powi(k as i32 - 1) * constant;
            w[j] = val;
            w[n - j] = val;
        }
    } else {
        let h = PI / n as f64;
        for j in 0..=n / 2 {
            let c = if j == 0 { 0.5 } else { 1.0 };
            let val = c * h * sin[j].powi(k as i32) * constant;
            w[j] = val;
            w[n - j] = val;
        }
    }
    w
}
