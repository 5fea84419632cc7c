//! Resolvent problem on a bent half space Ω₊ = Φ(ℝ²₊) with N = 2.
//!
//! The problem is pulled back to the flat half space and written as
//! L₀(w, H) + 𝓡(w, H) = Z₊, where L₀ is the flat operator and 𝓡 collects
//! every term carrying a derivative of the bump. The data-side fixed point
//! Y = Z₊ − 𝓡 S Y, with S the flat solver, is iterated until it settles.
//!
//! Physical problem, with coefficients γ₁, γ₃ constant:
//!
//! λv − γ₁⁻¹Div T(v) = f in Ω₊,
//! T(v)n₊ + σ(m − Δ_Γ)H n₊ = g on Γ₊,
//! λH − v·n₊ = k on Γ₊,
//!
//! with T(v) = μ(∇v + ∇vᵀ) + (ν − μ + γ₁ζ′)div v·I.

mod geometry;

pub use geometry::{build_geometry, DiffeoBounds, DiffeoSpec, SurfaceGeometry};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::{BoundaryField, Domain, HalfSpaceField, NormalGrid, TangentialGrid};
use crate::halfspace::solve_reduced_resolvent;
use crate::params::Model;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// (interior, boundary, kinematic) data of the reduced problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTriple {
    pub f: HalfSpaceField,
    pub g: BoundaryField,
    pub k: BoundaryField,
}

impl DataTriple {
    pub fn zeros(tg: &TangentialGrid, grid: &Arc<NormalGrid>, domain: Domain) -> Self {
        DataTriple {
            f: HalfSpaceField::zeros(tg, grid, 2, domain),
            g: BoundaryField::zeros(tg, 2, domain),
            k: BoundaryField::zeros(tg, 1, domain),
        }
    }

    fn check(&self) -> Result<()> {
        if self.f.tangential.dims() != 1 || self.f.components != 2 || self.g.components != 2 || self.k.components != 1 {
            return Err(LabError::ShapeMismatch("bent data must be (2, 2, 1) components on a line".into()));
        }
        if self.g.tangential != self.f.tangential || self.k.tangential != self.f.tangential {
            return Err(LabError::ShapeMismatch("data fields live on different tangential grids".into()));
        }
        if self.g.domain != self.f.domain || self.k.domain != self.f.domain {
            return Err(LabError::ShapeMismatch("data fields are in different domains".into()));
        }
        self.f.check_finite()?;
        self.g.check_finite()?;
        self.k.check_finite()
    }

    pub fn to_spectral(&self) -> Result<Self> {
        Ok(DataTriple { f: self.f.to_spectral()?, g: self.g.to_spectral()?, k: self.k.to_spectral()? })
    }

    pub fn to_physical(&self) -> Result<Self> {
        Ok(DataTriple { f: self.f.to_physical()?, g: self.g.to_physical()?, k: self.k.to_physical()? })
    }

    /// a·self + b·other.
    pub fn combine(&self, a: Complex64, other: &DataTriple, b: Complex64) -> Result<Self> {
        Ok(DataTriple {
            f: self.f.scaled(a).axpy(b, &other.f)?,
            g: self.g.scaled(a).axpy(b, &other.g)?,
            k: self.k.scaled(a).axpy(b, &other.k)?,
        })
    }

    /// ‖F‖_{L²} + ‖(|λ|^{1/2}⟨ξ⟩^{−1/2} + ⟨ξ⟩^{1/2})ĝ‖ + ‖⟨ξ⟩^{3/2}k̂‖ on spectral data.
    pub fn norm(&self, lambda: Complex64) -> Result<f64> {
        if self.f.domain != Domain::Spectral {
            return Err(LabError::ShapeMismatch("the data norm is evaluated on spectral data".into()));
        }
        let tg = &self.f.tangential;
        let w = self.f.normal.weights();
        let vol = tg.box_volume();
        let root = lambda.norm().sqrt();
        let (mut nf, mut ng, mut nk) = (0.0, 0.0, 0.0);
        for m in 0..tg.mode_count() {
            let xi = tg.frequency(m)[0];
            let br = (1.0 + xi * xi).sqrt();
            for (i, wi) in w.iter().enumerate() {
                nf += wi * (self.f.at(m, i, 0).norm_sqr() + self.f.at(m, i, 1).norm_sqr());
            }
            let wg = root / br.sqrt() + br.sqrt();
            ng += wg * wg * (self.g.at(m, 0).norm_sqr() + self.g.at(m, 1).norm_sqr());
            nk += br.powi(3) * self.k.data[m].norm_sqr();
        }
        Ok(((nf / vol).sqrt() + (ng / vol).sqrt() + (nk / vol).sqrt()).max(0.0))
    }
}

/// (f∘Φ, |𝒜_Φn₀|·g∘Φ, k∘Φ) on the flat grid. `data` is sampled on the
/// physical grid covering Ω₊; points mapped beyond x₂ = X read zero.
pub fn pullback_data(data: &DataTriple, spec: &DiffeoSpec) -> Result<DataTriple> {
    data.check()?;
    let data = data.to_physical()?;
    let geo = build_geometry(spec, &data.f.tangential)?;
    let grid = data.f.normal.clone();
    let tg = data.f.tangential.clone();
    let mut out = DataTriple::zeros(&tg, &grid, Domain::Physical);
    for m in 0..tg.mode_count() {
        let b = spec.bump(geo.xi[m])[0];
        let cols = [data.f.column(m, 0), data.f.column(m, 1)];
        for (i, &x) in grid.nodes.iter().enumerate() {
            for c in 0..2 {
                let v = sample_column(&grid, &cols[c], i, x + b)?;
                let idx = out.f.index(m, i, c);
                out.f.data[idx] = v;
            }
        }
        for c in 0..2 {
            out.g.data[2 * m + c] = geo.a_n0[m] * data.g.at(m, c);
        }
        out.k.data[m] = data.k.data[m];
    }
    Ok(out)
}

/// Value of a column at `y`; node `i` is returned as is when `y` is that node.
fn sample_column(grid: &NormalGrid, col: &[Complex64], i: usize, y: f64) -> Result<Complex64> {
    if y == grid.nodes[i] {
        return Ok(col[i]);
    }
    if y > grid.x_max {
        return Ok(ZERO);
    }
    let row = grid.interpolation_row(y)?;
    Ok(row.iter().zip(col).map(|(r, v)| v * *r).sum())
}

/// v = w∘Φ⁻¹ on the physical grid and H over Γ₊ as a function of x₁.
/// Grid points below Γ₊ lie outside Ω₊ and are set to zero.
pub fn push_forward(w: &HalfSpaceField, h: &BoundaryField, spec: &DiffeoSpec) -> Result<(HalfSpaceField, BoundaryField)> {
    let w = w.to_physical()?;
    let h = h.to_physical()?;
    let grid = w.normal.clone();
    let tg = w.tangential.clone();
    let mut v = HalfSpaceField::zeros(&tg, &grid, w.components, Domain::Physical);
    for m in 0..tg.mode_count() {
        let b = spec.bump(tg.coords(m)[0])[0];
        for c in 0..w.components {
            let col = w.column(m, c);
            for (i, &x) in grid.nodes.iter().enumerate() {
                if x - b < 0.0 {
                    continue;
                }
                let idx = v.index(m, i, c);
                v.data[idx] = sample_column(&grid, &col, i, x - b)?;
            }
        }
    }
    Ok((v, h))
}

/// Physical values of ∂_i w_j with component index 2i + j.
fn gradient(w: &HalfSpaceField) -> Result<HalfSpaceField> {
    let w = w.to_spectral()?;
    let tg = &w.tangential;
    let grid = &w.normal;
    let mut out = HalfSpaceField::zeros(tg, grid, 4, Domain::Spectral);
    for m in 0..tg.mode_count() {
        let xi = tg.frequency(m)[0];
        for j in 0..2 {
            let col = w.column(m, j);
            let dx: Vec<Complex64> = col.iter().map(|z| I * xi * z).collect();
            out.set_column(m, j, &dx);
            out.set_column(m, 2 + j, &grid.apply(grid.d1(), &col));
        }
    }
    out.to_physical()
}

/// Physical values of H, H′, H″.
fn surface_derivatives(h: &BoundaryField) -> Result<BoundaryField> {
    let h = h.to_spectral()?;
    let tg = &h.tangential;
    let mut out = BoundaryField::zeros(tg, 3, Domain::Spectral);
    for m in 0..tg.mode_count() {
        let xi = tg.frequency(m)[0];
        out.data[3 * m] = h.data[m];
        out.data[3 * m + 1] = I * xi * h.data[m];
        out.data[3 * m + 2] = -xi * xi * h.data[m];
    }
    out.to_physical()
}

type Mat = [[Complex64; 2]; 2];

fn stress(p: &Mat, mu: f64, lame: Complex64) -> Mat {
    let div = p[0][0] + p[1][1];
    let mut t = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            t[i][j] = mu * (p[i][j] + p[j][i]);
        }
        t[i][i] += lame * div;
    }
    t
}

fn mat_at(grad: &HalfSpaceField, m: usize, i: usize) -> Mat {
    [[grad.at(m, i, 0), grad.at(m, i, 1)], [grad.at(m, i, 2), grad.at(m, i, 3)]]
}

/// μ and the coefficient of div·I in T.
fn stress_coefficients(model: &Model, lambda: Complex64) -> Result<(f64, Complex64)> {
    let k = model.coefficients(lambda)?;
    let p = &model.fluid;
    Ok((p.mu, p.nu - p.mu + p.gamma1 * k.zeta))
}

/// 𝓡(w, H) = L_Φ(w, H) − L₀(w, H) in data space, returned spectral.
///
/// Interior: −γ₁⁻¹Div_ξ E with E = 𝒜T(∇_x v) − S(∇_ξ w), using the Piola
/// identity (det ∇Φ = 1). Boundary: the stress row multiplied by
/// |𝒜_Φn₀|, so n₊ enters as 𝒜_Φn₀ = (b′, −1). Kinematic: (n₀ − n₊)·w.
pub fn apply_perturbation(
    w: &HalfSpaceField,
    h: &BoundaryField,
    geo: &SurfaceGeometry,
    model: &Model,
    lambda: Complex64,
) -> Result<DataTriple> {
    if w.components != 2 || h.components != 1 || w.tangential.dims() != 1 || h.tangential != w.tangential {
        return Err(LabError::ShapeMismatch("iterate must be (w: 2 components, H: 1) on a line".into()));
    }
    if geo.xi.len() != w.tangential.mode_count() {
        return Err(LabError::ShapeMismatch("geometry was built on another grid".into()));
    }
    let (mu, lame) = stress_coefficients(model, lambda)?;
    let p = &model.fluid;
    let tg = w.tangential.clone();
    let grid = w.normal.clone();
    let nn = grid.len();
    let grad = gradient(w)?;
    let wp = w.to_physical()?;
    let hd = surface_derivatives(h)?;

    let mut e = HalfSpaceField::zeros(&tg, &grid, 4, Domain::Physical);
    let mut out = DataTriple::zeros(&tg, &grid, Domain::Physical);
    for m in 0..tg.mode_count() {
        let beta = geo.slope[m];
        for i in 0..nn {
            let g = mat_at(&grad, m, i);
            let mut pm = g;
            for j in 0..2 {
                pm[0][j] -= beta * g[1][j];
            }
            let t = stress(&pm, mu, lame);
            let s = stress(&g, mu, lame);
            for j in 0..2 {
                let i1 = e.index(m, i, j);
                e.data[i1] = t[0][j] - s[0][j];
                let i2 = e.index(m, i, 2 + j);
                e.data[i2] = t[1][j] - beta * t[0][j] - s[1][j];
            }
            if i == 0 {
                let (hh, h1, h2) = (hd.data[3 * m], hd.data[3 * m + 1], hd.data[3 * m + 2]);
                let lb = geo.g_inv[m] * h2 - geo.g_inv[m] * geo.christoffel[m] * h1;
                let surf = p.sigma * (p.m * hh - lb);
                out.g.data[2 * m] = beta * t[0][0] - (t[0][1] - s[0][1]) + beta * surf;
                // σ𝒢(H) with 𝒢(H) = Δ_Γ H − ∂₁²H
                out.g.data[2 * m + 1] = beta * t[1][0] - (t[1][1] - s[1][1]) + p.sigma * (lb - h2);
                let an = geo.a_n0[m];
                out.k.data[m] = -(beta * wp.at(m, 0, 0) / an + (1.0 - 1.0 / an) * wp.at(m, 0, 1));
            }
        }
    }
    let e = e.to_spectral()?;
    let mut f = HalfSpaceField::zeros(&tg, &grid, 2, Domain::Spectral);
    for m in 0..tg.mode_count() {
        let xi = tg.frequency(m)[0];
        for j in 0..2 {
            let d2 = grid.apply(grid.d1(), &e.column(m, 2 + j));
            let col: Vec<Complex64> = e.column(m, j).iter().zip(&d2).map(|(a, b)| -(I * xi * a + b) / p.gamma1).collect();
            f.set_column(m, j, &col);
        }
    }
    Ok(DataTriple { f, g: out.g.to_spectral()?, k: out.k.to_spectral()? })
}

fn flat_solve(y: &DataTriple, model: &Model, lambda: Complex64) -> Result<(HalfSpaceField, BoundaryField)> {
    solve_reduced_resolvent(&y.f, &y.g, &y.k, model, lambda)
}

/// One row of the history: update norm and ratio to the previous update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    #[serde(rename = "updateNorm")]
    pub update_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct PerturbationState {
    /// Flat iterate (w, H), spectral.
    pub w: HalfSpaceField,
    pub h: BoundaryField,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
}

impl PerturbationState {
    pub fn ratios(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.ratio).collect()
    }

    /// Geometric mean of the last three update ratios whose updates are
    /// still above round-off; the first ratio if there are none.
    pub fn asymptotic_ratio(&self, data_norm: f64) -> f64 {
        let floor = 1e-12 * data_norm;
        let tail: Vec<f64> = self.history.iter().skip(1).filter(|r| r.update_norm > floor).map(|r| r.ratio).collect();
        let tail = &tail[tail.len().saturating_sub(3)..];
        if tail.is_empty() {
            return self.history.first().map_or(0.0, |r| r.ratio);
        }
        (tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64).exp()
    }

    pub fn write_history<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        for r in &self.history {
            wtr.serialize(r).map_err(|e| LabError::Io(e.to_string()))?;
        }
        wtr.flush().map_err(|e| LabError::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeumannOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        NeumannOptions { max_iter: 50, tol: 1e-12 }
    }
}

/// Residual row of the physical problem.
#[derive(Debug, Clone, Serialize)]
pub struct BentResidualRow {
    pub name: String,
    pub absolute: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BentResidual {
    pub rows: Vec<BentResidualRow>,
    pub max_relative: f64,
}

#[derive(Debug, Clone)]
pub struct BentSolution {
    pub state: PerturbationState,
    /// v and H in physical coordinates.
    pub v: HalfSpaceField,
    pub h: BoundaryField,
    pub residual: BentResidual,
    pub bounds: DiffeoBounds,
    /// ‖Z₊‖/‖Z‖ in the data norm.
    pub pullback_constant: f64,
    pub data_norm: f64,
}

/// Fixed point Y = Z₊ − 𝓡SY on the pulled-back data, then push forward.
pub fn neumann_solve(
    data: &DataTriple,
    spec: &DiffeoSpec,
    model: &Model,
    lambda: Complex64,
    opts: &NeumannOptions,
) -> Result<BentSolution> {
    if opts.max_iter == 0 || !(opts.tol > 0.0) {
        return Err(LabError::InvalidParameter("need max_iter >= 1 and tol > 0".into()));
    }
    model.coefficients(lambda)?;
    data.check()?;
    let geo = build_geometry(spec, &data.f.tangential)?;
    let pulled = pullback_data(data, spec)?;
    let z0 = pulled.to_spectral()?;
    let z_norm = z0.norm(lambda)?;
    let raw_norm = data.to_spectral()?.norm(lambda)?;
    let pullback_constant = if raw_norm > 0.0 { z_norm / raw_norm } else { 1.0 };

    let mut y = z0.clone();
    let mut history = Vec::new();
    let mut prev = z_norm;
    let mut above = 0;
    let mut converged = z_norm == 0.0;
    while !converged && history.len() < opts.max_iter {
        let (w, h) = flat_solve(&y, model, lambda)?;
        let r = apply_perturbation(&w, &h, &geo, model, lambda)?;
        let next = z0.combine(Complex64::new(1.0, 0.0), &r, Complex64::new(-1.0, 0.0))?;
        let update = next.combine(Complex64::new(1.0, 0.0), &y, Complex64::new(-1.0, 0.0))?.norm(lambda)?;
        let ratio = if prev > 0.0 { update / prev } else { 0.0 };
        history.push(IterationRecord { iter: history.len() + 1, update_norm: update, ratio });
        y = next;
        prev = update;
        converged = update < opts.tol * z_norm;
        above = if ratio >= 1.0 { above + 1 } else { 0 };
        if above >= 3 {
            return Err(LabError::Divergence { ratio });
        }
    }
    let (w, h) = flat_solve(&y, model, lambda)?;
    let residual = physical_residual(&w, &h, &pulled, &geo, model, lambda)?;
    let (v, hp) = push_forward(&w, &h, spec)?;
    Ok(BentSolution {
        state: PerturbationState { w, h, history, converged },
        v,
        h: hp,
        residual,
        bounds: spec.bounds(),
        pullback_constant,
        data_norm: z_norm,
    })
}

/// Smooth random data: a few Gaussian bumps per component.
pub fn random_data(tg: &TangentialGrid, grid: &Arc<NormalGrid>, seed: u64) -> DataTriple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = tg.half_length[0];
    let mut bump = || {
        let (x0, y0) = (rng.gen_range(-0.3 * half..0.3 * half), rng.gen_range(0.5..3.0));
        let (w, a) = (rng.gen_range(0.6..1.5), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        move |x: f64, y: f64| a * (-((x - x0).powi(2) + (y - y0).powi(2)) / (w * w)).exp()
    };
    let (b1, b2, b3, b4, b5) = (bump(), bump(), bump(), bump(), bump());
    DataTriple {
        f: HalfSpaceField::from_fn(tg, grid, 2, |x, y| vec![b1(x[0], y), b2(x[0], y)]),
        g: BoundaryField::from_fn(tg, 2, |x| vec![b3(x[0], 0.0), b4(x[0], 0.0)]),
        k: BoundaryField::from_fn(tg, 1, |x| vec![b5(x[0], 0.0)]),
    }
}

/// max over random probes of ‖𝓡SZ‖/‖Z‖, each probe first pushed through
/// `power_steps` normalized applications of 𝓡S. One-step ratios on smooth
/// probes underestimate the asymptotic update ratio of the iteration.
pub fn contraction_proxy(
    spec: &DiffeoSpec,
    model: &Model,
    lambda: Complex64,
    tg: &TangentialGrid,
    grid: &Arc<NormalGrid>,
    probes: usize,
    power_steps: usize,
    seed: u64,
) -> Result<f64> {
    let geo = build_geometry(spec, tg)?;
    let ratios: Vec<f64> = (0..probes)
        .into_par_iter()
        .map(|p| {
            let mut z = random_data(tg, grid, seed.wrapping_add(p as u64)).to_spectral()?;
            let mut ratio = 0.0;
            for _ in 0..=power_steps {
                let n0 = z.norm(lambda)?;
                let (w, h) = flat_solve(&z, model, lambda)?;
                let r = apply_perturbation(&w, &h, &geo, model, lambda)?;
                let n1 = r.norm(lambda)?;
                ratio = n1 / n0;
                if n1 == 0.0 {
                    break;
                }
                z = r.combine(Complex64::new(1.0 / n1, 0.0), &r, ZERO)?;
            }
            Ok(ratio)
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

struct Row {
    name: &'static str,
    res: f64,
    terms: Vec<f64>,
}

impl Row {
    fn new(name: &'static str, n: usize) -> Self {
        Row { name, res: 0.0, terms: vec![0.0; n] }
    }

    fn add(&mut self, weight: f64, terms: &[Complex64], residual: Complex64) {
        self.res += weight * residual.norm_sqr();
        for (t, z) in self.terms.iter_mut().zip(terms) {
            *t += weight * z.norm_sqr();
        }
    }

    fn finish(self) -> BentResidualRow {
        let absolute = self.res.sqrt();
        let scale: f64 = self.terms.iter().map(|t| t.sqrt()).sum();
        BentResidualRow { name: self.name.into(), absolute, relative: if scale > 0.0 { absolute / scale } else { absolute } }
    }
}

/// Residual of the physical equations at x = Φ(ξ), with x-derivatives
/// taken by the chain rule ∂_{x₁} = ∂₁ − b′∂₂, ∂_{x₂} = ∂₂ applied to the
/// stress itself and Δ_Γ in divergence form 𝔤^{−1/2}∂₁(𝔤^{−1/2}∂₁H).
/// `pulled` holds (f∘Φ, |𝒜_Φn₀|g∘Φ, k∘Φ). Interior rows skip the end nodes.
pub fn physical_residual(
    w: &HalfSpaceField,
    h: &BoundaryField,
    pulled: &DataTriple,
    geo: &SurfaceGeometry,
    model: &Model,
    lambda: Complex64,
) -> Result<BentResidual> {
    let (mu, lame) = stress_coefficients(model, lambda)?;
    let p = &model.fluid;
    let tg = w.tangential.clone();
    let grid = w.normal.clone();
    let nn = grid.len();
    let pulled = pulled.to_physical()?;
    let wp = w.to_physical()?;
    let grad = gradient(w)?;

    let mut t = HalfSpaceField::zeros(&tg, &grid, 4, Domain::Physical);
    for m in 0..tg.mode_count() {
        let beta = geo.slope[m];
        for i in 0..nn {
            let g = mat_at(&grad, m, i);
            let mut px = g;
            px[0][0] = g[0][0] - beta * g[1][0];
            px[0][1] = g[0][1] - beta * g[1][1];
            let s = stress(&px, mu, lame);
            for a in 0..2 {
                for b in 0..2 {
                    let idx = t.index(m, i, 2 * a + b);
                    t.data[idx] = s[a][b];
                }
            }
        }
    }
    // ∂₁T spectrally, ∂₂T by collocation in physical space
    let ts = t.to_spectral()?;
    let mut d1t = ts.clone();
    for m in 0..tg.mode_count() {
        let xi = tg.frequency(m)[0];
        for c in 0..4 {
            let col: Vec<Complex64> = ts.column(m, c).iter().map(|z| I * xi * z).collect();
            d1t.set_column(m, c, &col);
        }
    }
    let d1t = d1t.to_physical()?;

    let hs = h.to_spectral()?;
    let mut hd = BoundaryField::zeros(&tg, 1, Domain::Spectral);
    for m in 0..tg.mode_count() {
        hd.data[m] = I * tg.frequency(m)[0] * hs.data[m];
    }
    let hd = hd.to_physical()?;
    let mut flux = hd.clone();
    for m in 0..tg.mode_count() {
        flux.data[m] /= geo.det[m].sqrt();
    }
    let flux = flux.to_spectral()?;
    let mut lb = flux.clone();
    for m in 0..tg.mode_count() {
        lb.data[m] = I * tg.frequency(m)[0] * flux.data[m];
    }
    let mut lb = lb.to_physical()?;
    for m in 0..tg.mode_count() {
        lb.data[m] /= geo.det[m].sqrt();
    }
    let hp = h.to_physical()?;

    let wts = grid.weights();
    let dx = tg.spacing(0);
    let mut interior = Row::new("momentum", 3);
    let mut boundary = Row::new("stress", 3);
    let mut kinematic = Row::new("kinematic", 3);
    for m in 0..tg.mode_count() {
        let beta = geo.slope[m];
        let cols: Vec<Vec<Complex64>> = (0..4).map(|c| t.column(m, c)).collect();
        let d2: Vec<Vec<Complex64>> = cols.iter().map(|c| grid.apply(grid.d1(), c)).collect();
        for i in 1..nn - 1 {
            for j in 0..2 {
                let div = d1t.at(m, i, j) - beta * d2[j][i] + d2[2 + j][i];
                let terms = [lambda * wp.at(m, i, j), -div / p.gamma1, pulled.f.at(m, i, j)];
                interior.add(wts[i] * dx, &terms, terms[0] + terms[1] - terms[2]);
            }
        }
        let n = geo.normal[m];
        let tb = [[cols[0][0], cols[1][0]], [cols[2][0], cols[3][0]]];
        let surf = p.sigma * (p.m * hp.data[m] - lb.data[m]);
        for j in 0..2 {
            let tn = tb[j][0] * n[0] + tb[j][1] * n[1];
            let terms = [tn, surf * n[j], pulled.g.at(m, j) / geo.a_n0[m]];
            boundary.add(dx, &terms, terms[0] + terms[1] - terms[2]);
        }
        let vn = wp.at(m, 0, 0) * n[0] + wp.at(m, 0, 1) * n[1];
        let terms = [lambda * hp.data[m], -vn, pulled.k.data[m]];
        kinematic.add(dx, &terms, terms[0] + terms[1] - terms[2]);
    }
    let rows: Vec<BentResidualRow> = [interior, boundary, kinematic].into_iter().map(Row::finish).collect();
    let max_relative = rows.iter().map(|r| r.relative).fold(0.0, f64::max);
    Ok(BentResidual { rows, max_relative })
}
