//! Radial graphs `{ρ = ρ(θ)}` and their extrinsic geometry.
//!
//! All quantities are computed in the symmetry-reduced frame: one radial
//! direction `∂_s` on the base sphere, `b - 1` tangential horizontal directions,
//! and (for `K ≠ R`) `a` vertical directions spanned by `J_i ν`. With
//! `p = φ_s`, `q = φ_ss`, `T = cot(θ) φ_θ / c²` and `v = √(1 + p²)` the second
//! fundamental form (indices raised with the induced metric) has entries
//!
//! ```text
//! h_r  = (cosh ρ - q/v²) / (v sinh ρ)
//! h_t  = (cosh ρ - T)    / (v sinh ρ)          (b - 1 copies)
//! h_V  = (coth ρ + tanh ρ) / v                  (a copies)
//! h_tV = -cosh ρ · p     / (v sinh ρ)          (a mixed pairs)
//! ```
//!
//! and `H = h_r + (b-1) h_t + a h_V`. The mixed entry comes from the Berger
//! Hessian of an invariant function, whose only off-diagonal terms are
//! `√λ u_s` between a tangential direction and its partner fibre direction.

use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::ambient::{coth_minus_one, ln_cosh, ln_sinh, tanh_minus_one, AmbientSpace, FieldKind};
use crate::error::{HypflowError, Result};
use crate::grid::{d1, d2, d3, ReducedGrid, StencilOrder};

/// `φ(ρ) = ln tanh(ρ/2)`, the antiderivative of `1/sinh ρ` vanishing at infinity.
pub fn phi_from_rho(rho: f64) -> Result<f64> {
    if !(rho > 0.0) || rho.is_nan() {
        return Err(HypflowError::Domain(format!("phi_from_rho needs rho > 0, got {rho}")));
    }
    Ok(phi_unchecked(rho))
}

pub(crate) fn phi_unchecked(rho: f64) -> f64 {
    let e = (-rho).exp();
    (-(-rho).exp_m1()).ln() - e.ln_1p()
}

/// Inverse of [`phi_from_rho`].
pub fn rho_from_phi(phi: f64) -> Result<f64> {
    if !(phi < 0.0) {
        return Err(HypflowError::Domain(format!("rho_from_phi needs phi < 0, got {phi}")));
    }
    Ok(rho_unchecked(phi))
}

pub(crate) fn rho_unchecked(phi: f64) -> f64 {
    phi.exp().ln_1p() - (-phi.exp_m1()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// Axisymmetric functions on `S^m` (`K = R`).
    Axisymmetric,
    /// `S^a`-invariant functions pulled back from `KP^1` (`K ≠ R`, `n = 2`).
    FibreInvariant,
}

/// A star-shaped radial graph sampled on a [`ReducedGrid`]. Holds both `ρ` and `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: Arc<ReducedGrid>,
    rho: Vec<f64>,
    phi: Vec<f64>,
}

impl RadialProfile {
    pub fn from_rho(grid: Arc<ReducedGrid>, rho: Vec<f64>) -> Result<Self> {
        check_len(&grid, rho.len())?;
        let mut phi = Vec::with_capacity(rho.len());
        for (j, &r) in rho.iter().enumerate() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(HypflowError::Domain(format!("rho must be positive and finite, got {r} at node {j}")));
            }
            phi.push(phi_unchecked(r));
        }
        Ok(Self { grid, rho, phi })
    }

    pub fn from_phi(grid: Arc<ReducedGrid>, phi: Vec<f64>) -> Result<Self> {
        check_len(&grid, phi.len())?;
        let mut rho = Vec::with_capacity(phi.len());
        for (j, &p) in phi.iter().enumerate() {
            if !(p < 0.0 && p.is_finite()) {
                return Err(HypflowError::Domain(format!("phi must be negative and finite, got {p} at node {j}")));
            }
            rho.push(rho_unchecked(p));
        }
        Ok(Self { grid, rho, phi })
    }

    /// Samples `ρ = f(θ)` on a fresh grid.
    pub fn from_fn(amb: AmbientSpace, nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = Arc::new(ReducedGrid::new(amb, nodes)?);
        let rho = grid.theta().iter().map(|&t| f(t)).collect();
        Self::from_rho(grid, rho)
    }

    pub fn constant(amb: AmbientSpace, nodes: usize, rho0: f64) -> Result<Self> {
        Self::from_fn(amb, nodes, |_| rho0)
    }

    pub fn grid(&self) -> &Arc<ReducedGrid> {
        &self.grid
    }

    pub fn amb(&self) -> &AmbientSpace {
        self.grid.amb()
    }

    pub fn symmetry(&self) -> Symmetry {
        match self.amb().field() {
            FieldKind::R => Symmetry::Axisymmetric,
            _ => Symmetry::FibreInvariant,
        }
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn theta(&self) -> &[f64] {
        self.grid.theta()
    }

    pub fn is_constant(&self) -> bool {
        self.rho.iter().all(|&r| r == self.rho[0])
    }

    /// The same geometric profile sampled in the opposite coordinate direction.
    pub fn reversed(&self) -> Self {
        let mut rho = self.rho.clone();
        let mut phi = self.phi.clone();
        rho.reverse();
        phi.reverse();
        Self { grid: Arc::clone(&self.grid), rho, phi }
    }
}

fn check_len(grid: &ReducedGrid, len: usize) -> Result<()> {
    if len != grid.nodes() {
        return Err(HypflowError::Precondition(format!("profile has {len} values for {} nodes", grid.nodes())));
    }
    Ok(())
}

/// Per-node geometry of a radial graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySlice {
    pub rho: Vec<f64>,
    pub phi: Vec<f64>,
    /// `|∇φ|²_σ`.
    pub grad_phi_sq: Vec<f64>,
    pub v: Vec<f64>,
    pub h: Vec<f64>,
    pub hbar: Vec<f64>,
    /// `H - Ĥ(ρ)`, computed without cancellation.
    pub h_minus_hbar: Vec<f64>,
    /// `H - (m + a)`, computed without cancellation.
    pub h_dev: Vec<f64>,
    pub h_radial: Vec<f64>,
    pub h_tangential: Vec<f64>,
    pub h_vertical: Vec<f64>,
    /// `|h_tV|`; its sign depends on the frame orientation.
    pub h_mixed: Vec<f64>,
    /// `|A|²`.
    pub a_sq: Vec<f64>,
    /// `|Å|²` for `K = R`, zero otherwise.
    pub traceless_sq: Vec<f64>,
    /// `Σ` over horizontal directions of `(h_ii - 1)²`.
    pub horizontal_dev_sq: Vec<f64>,
    /// `Σ` over vertical directions of `(h_kk - 2)²`.
    pub vertical_dev_sq: Vec<f64>,
    pub max_principal: Vec<f64>,
    /// `|∇²_σ φ|_σ`.
    pub norm_d2phi: Vec<f64>,
    /// `|φ_sss|`.
    pub norm_d3phi: Vec<f64>,
    /// `v sinh^m ρ cosh^a ρ`, the induced volume against `dσ`.
    pub area_density: Vec<f64>,
    /// `area_density` times the quadrature weight of the node.
    pub area_element: Vec<f64>,
    amb: AmbientSpace,
    base_dim: usize,
}

impl GeometrySlice {
    pub fn nodes(&self) -> usize {
        self.rho.len()
    }

    pub fn amb(&self) -> &AmbientSpace {
        &self.amb
    }

    /// Principal curvatures at node `j`. For `K = R`: `h_r` and `m - 1` copies of
    /// `h_t`. For `K ≠ R`: `h_r` and `a` copies of each eigenvalue of
    /// `[[h_t, h_tV], [h_tV, h_V]]`.
    pub fn principal_curvatures(&self, j: usize) -> Vec<f64> {
        let mut out = vec![self.h_radial[j]];
        if self.amb.field() == FieldKind::R {
            out.extend(std::iter::repeat(self.h_tangential[j]).take(self.base_dim - 1));
        } else {
            let a = self.amb.a();
            let (hi, lo) = mixed_eigenvalues(self.h_tangential[j], self.h_vertical[j], self.h_mixed[j]);
            out.extend(std::iter::repeat(hi).take(a));
            out.extend(std::iter::repeat(lo).take(a));
        }
        out
    }

    pub fn total_area(&self) -> f64 {
        self.area_element.iter().sum()
    }

    pub fn sup_grad_phi_sq(&self) -> f64 {
        self.grad_phi_sq.iter().cloned().fold(0.0, f64::max)
    }

    pub fn sup_h_dev(&self) -> f64 {
        self.h_dev.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn min_h(&self) -> f64 {
        self.h.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_pc(&self) -> f64 {
        self.max_principal.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm_d2phi(&self) -> f64 {
        self.norm_d2phi.iter().cloned().fold(0.0, f64::max)
    }

    pub fn sup_norm_d3phi(&self) -> f64 {
        self.norm_d3phi.iter().cloned().fold(0.0, f64::max)
    }

    pub fn rho_min(&self) -> f64 {
        self.rho.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn rho_max(&self) -> f64 {
        self.rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn mixed_eigenvalues(t: f64, v: f64, x: f64) -> (f64, f64) {
    let mean = 0.5 * (t + v);
    let r = (0.25 * (t - v) * (t - v) + x * x).sqrt();
    (mean + r, mean - r)
}

/// Computes the slice with second-order stencils.
pub fn geometry_slice(profile: &RadialProfile) -> Result<GeometrySlice> {
    geometry_slice_with(profile, StencilOrder::Second)
}

pub fn geometry_slice_with(profile: &RadialProfile, order: StencilOrder) -> Result<GeometrySlice> {
    let grid = profile.grid();
    let amb = *grid.amb();
    let (a, m) = (amb.a(), amb.m());
    let (af, mf) = (a as f64, m as f64);
    let b = grid.base_dim();
    let kb = (b - 1) as f64;
    let c = grid.scale();
    let n = grid.nodes();
    let h = grid.h();

    let phi = profile.phi();
    let rho = profile.rho();
    let ft = d1(phi, h, order);
    let ftt = d2(phi, h, order);
    let fttt = d3(phi, h);
    let tang = grid.tangential(&ft, &ftt);

    let mut s = GeometrySlice {
        rho: rho.to_vec(),
        phi: phi.to_vec(),
        grad_phi_sq: vec![0.0; n],
        v: vec![0.0; n],
        h: vec![0.0; n],
        hbar: vec![0.0; n],
        h_minus_hbar: vec![0.0; n],
        h_dev: vec![0.0; n],
        h_radial: vec![0.0; n],
        h_tangential: vec![0.0; n],
        h_vertical: vec![0.0; n],
        h_mixed: vec![0.0; n],
        a_sq: vec![0.0; n],
        traceless_sq: vec![0.0; n],
        horizontal_dev_sq: vec![0.0; n],
        vertical_dev_sq: vec![0.0; n],
        max_principal: vec![0.0; n],
        norm_d2phi: vec![0.0; n],
        norm_d3phi: vec![0.0; n],
        area_density: vec![0.0; n],
        area_element: vec![0.0; n],
        amb,
        base_dim: b,
    };
    let weights = grid.weights();

    for j in 0..n {
        let r = rho[j];
        let p = ft[j] / c;
        let q = ftt[j] / (c * c);
        let t = tang[j];
        let p2 = p * p;
        let v = (1.0 + p2).sqrt();
        let (sh, ch) = (r.sinh(), r.cosh());
        let inv = 1.0 / (v * sh);
        let v2 = v * v;
        // 1/v - 1 without cancellation
        let inv_v_m1 = -p2 / (v * (1.0 + v));

        let hbar = amb.hbar_unchecked(r);
        let hr = inv * (ch - q / v2);
        let ht = inv * (ch - t);
        let hv = (1.0 / r.tanh() + r.tanh()) / v;
        let hm = (ch * p * inv).abs();
        let h_total = hr + kb * ht + af * hv;
        let h_mh = -inv * (q / v2 + kb * t) + hbar * inv_v_m1;
        let h_dev = h_mh + amb.hbar_excess(r);

        // h_r - 1, h_t - 1, h_V - 2 without cancellation
        let base = coth_minus_one(r) / v + inv_v_m1;
        let dr = base - inv * q / v2;
        let dt = base - inv * t;
        let dv = (coth_minus_one(r) + tanh_minus_one(r)) / v + 2.0 * inv_v_m1;

        let a_sq = hr * hr + kb * ht * ht + af * hv * hv + 2.0 * af * hm * hm;
        let traceless = if a == 0 {
            let diff = inv * (t - q / v2);
            (mf - 1.0) / mf * diff * diff
        } else {
            0.0
        };
        let max_pc = if a == 0 {
            hr.max(ht)
        } else {
            hr.max(mixed_eigenvalues(ht, hv, hm).0)
        };
        let density = v * (mf * ln_sinh(r) + af * ln_cosh(r)).exp();

        s.grad_phi_sq[j] = p2;
        s.v[j] = v;
        s.h[j] = h_total;
        s.hbar[j] = hbar;
        s.h_minus_hbar[j] = h_mh;
        s.h_dev[j] = h_dev;
        s.h_radial[j] = hr;
        s.h_tangential[j] = ht;
        s.h_vertical[j] = hv;
        s.h_mixed[j] = hm;
        s.a_sq[j] = a_sq;
        s.traceless_sq[j] = traceless;
        s.horizontal_dev_sq[j] = dr * dr + kb * dt * dt;
        s.vertical_dev_sq[j] = af * dv * dv;
        s.max_principal[j] = max_pc;
        s.norm_d2phi[j] = (q * q + kb * t * t + 2.0 * af * p2).sqrt();
        s.norm_d3phi[j] = fttt[j].abs() / (c * c * c);
        s.area_density[j] = density;
        s.area_element[j] = density * weights[j];

        let checks: [(f64, &'static str); 5] =
            [(v, "v"), (h_total, "H"), (a_sq, "|A|^2"), (density, "area density"), (h_mh, "H - Hbar")];
        for (val, name) in checks {
            if !val.is_finite() {
                return Err(HypflowError::NumericBlowup { node: j, quantity: name });
            }
        }
    }
    Ok(s)
}

/// Area of the hypersurface, `∫ v sinh^m ρ cosh^a ρ dσ`.
pub fn area(profile: &RadialProfile) -> Result<f64> {
    Ok(geometry_slice(profile)?.total_area())
}

/// Entries of the Hessian of an invariant function `u` for the Berger metric
/// `e_λ`, in an `e_λ`-orthonormal adapted frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BergerHessian {
    pub radial: f64,
    /// Tangential horizontal entry, `b - 1` copies.
    pub horizontal: f64,
    /// Vertical entry, `a` copies.
    pub vertical: f64,
    /// Off-diagonal horizontal/vertical entry, `a` symmetric pairs.
    pub mixed: f64,
    pub gradient: f64,
}

impl BergerHessian {
    pub fn norm_sq(&self, base_dim: usize, a: usize) -> f64 {
        let (k, af) = ((base_dim - 1) as f64, a as f64);
        self.radial * self.radial
            + k * self.horizontal * self.horizontal
            + af * self.vertical * self.vertical
            + 2.0 * af * self.mixed * self.mixed
    }

    pub fn trace(&self, base_dim: usize, a: usize) -> f64 {
        self.radial + (base_dim - 1) as f64 * self.horizontal + a as f64 * self.vertical
    }
}

/// Discrete Berger Hessian of `u` at every node.
pub fn berger_hessian(grid: &ReducedGrid, u: &[f64], lambda: f64, order: StencilOrder) -> Vec<BergerHessian> {
    let c = grid.scale();
    let ut = d1(u, grid.h(), order);
    let utt = d2(u, grid.h(), order);
    let tang = grid.tangential(&ut, &utt);
    let root = lambda.sqrt();
    (0..grid.nodes())
        .map(|j| {
            let us = ut[j] / c;
            BergerHessian {
                radial: utt[j] / (c * c),
                horizontal: tang[j],
                vertical: 0.0,
                mixed: root * us,
                gradient: us,
            }
        })
        .collect()
}

/// Residuals of the Berger Hessian comparison for an invariant test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianResidual {
    /// `sup |Δ_e u - Δ_σ u|`, discrete `Δ_e` against the analytic `Δ_σ`.
    pub laplacian: f64,
    /// `sup | |∇²_e u|² - |∇²_σ u|² - 2a(λ-1)|∇u|² |`, discrete Hessians against
    /// the analytic gradient.
    pub hessian: f64,
}

/// Checks `|∇²_e u|²_e = |∇²_σ u|²_σ + 2a(λ-1)|∇_σ u|²` on the grid.
///
/// `u(θ)` returns `(u, u_θ, u_θθ)` in closed form.
pub fn hessian_relation_check(
    grid: &ReducedGrid,
    lambda: f64,
    order: StencilOrder,
    u: impl Fn(f64) -> (f64, f64, f64),
) -> Result<HessianResidual> {
    let amb = grid.amb();
    if amb.field() == FieldKind::R {
        return Err(HypflowError::WrongField("the Berger Hessian comparison needs K = C or H".into()));
    }
    if !(lambda > 0.0) {
        return Err(HypflowError::Domain(format!("Berger parameter must be positive, got {lambda}")));
    }
    let (a, b, c) = (amb.a(), grid.base_dim(), grid.scale());
    let samples: Vec<(f64, f64, f64)> = grid.theta().iter().map(|&t| u(t)).collect();
    let values: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let he = berger_hessian(grid, &values, lambda, order);
    let hs = berger_hessian(grid, &values, 1.0, order);
    let mut lap = 0.0f64;
    let mut hess = 0.0f64;
    for (j, &(_, ut, utt)) in samples.iter().enumerate() {
        let theta = grid.theta()[j];
        let tang = if grid.is_pole(j) { utt } else { theta.cos() / theta.sin() * ut };
        let lap_exact = utt / (c * c) + (b - 1) as f64 * tang / (c * c);
        let grad_sq = (ut / c) * (ut / c);
        lap = lap.max((he[j].trace(b, a) - lap_exact).abs());
        let diff = he[j].norm_sq(b, a) - hs[j].norm_sq(b, a) - 2.0 * a as f64 * (lambda - 1.0) * grad_sq;
        hess = hess.max(diff.abs());
    }
    Ok(HessianResidual { laplacian: lap, hessian: hess })
}

pub const PROFILE_MAGIC: &str = "# hypflow-profile v1";

/// Writes `θ ρ` rows under a header line.
pub fn write_profile(profile: &RadialProfile, mut out: impl Write) -> Result<()> {
    let amb = profile.amb();
    writeln!(out, "{PROFILE_MAGIC} field={} n={} nodes={}", amb.field(), amb.n(), profile.rho().len())?;
    for (t, r) in profile.theta().iter().zip(profile.rho()) {
        writeln!(out, "{t:e} {r:e}")?;
    }
    Ok(())
}

pub fn read_profile(input: impl BufRead) -> Result<RadialProfile> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| HypflowError::Parse("empty profile file".into()))??;
    let rest = header
        .strip_prefix(PROFILE_MAGIC)
        .ok_or_else(|| HypflowError::Parse(format!("bad profile header `{header}`")))?;
    let (mut field, mut n, mut nodes) = (None, None, None);
    for token in rest.split_whitespace() {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| HypflowError::Parse(format!("bad header token `{token}`")))?;
        let bad = || HypflowError::Parse(format!("bad header value `{token}`"));
        match k {
            "field" => field = Some(v.parse::<FieldKind>()?),
            "n" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
            "nodes" => nodes = Some(v.parse::<usize>().map_err(|_| bad())?),
            _ => return Err(HypflowError::Parse(format!("unknown header key `{k}`"))),
        }
    }
    let (field, n, nodes) = match (field, n, nodes) {
        (Some(f), Some(n), Some(k)) => (f, n, k),
        _ => return Err(HypflowError::Parse("profile header needs field, n and nodes".into())),
    };
    let amb = AmbientSpace::new(field, n)?;
    let grid = Arc::new(ReducedGrid::new(amb, nodes)?);
    let mut rho = Vec::with_capacity(nodes);
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(|ch: char| ch.is_whitespace() || ch == ',').filter(|s| !s.is_empty()).collect();
        if cols.len() != 2 {
            return Err(HypflowError::Parse(format!("profile row `{line}` needs two columns")));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| HypflowError::Parse(format!("bad number `{s}`")));
        let (t, r) = (parse(cols[0])?, parse(cols[1])?);
        let j = rho.len();
        if j >= nodes {
            return Err(HypflowError::Parse(format!("profile has more than {nodes} rows")));
        }
        if (t - grid.theta()[j]).abs() > 1e-9 {
            return Err(HypflowError::Parse(format!("row {j}: theta {t} is off the uniform grid")));
        }
        rho.push(r);
    }
    if rho.len() != nodes {
        return Err(HypflowError::Parse(format!("profile has {} rows, header says {nodes}", rho.len())));
    }
    RadialProfile::from_rho(grid, rho)
}
