//! Per-mode solvers for the half-space resolvent problem.
//!
//! All solvers work on the partial Fourier transform in x′: each tangential
//! mode ξ′ is an independent boundary value problem on x_N ∈ [0, X].
//! Results are returned in the spectral domain.

mod lame;
mod volevich;

pub use lame::{lame_mode, solve_lame_bvp};
pub use volevich::{cutoff, extend_boundary, solve_surface_volevich, VolevichOutput, VOLEVICH_TOL};

use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::{BoundaryField, Domain, HalfSpaceField, NormalGrid, TangentialGrid};
use crate::params::{Coefficients, Model, ZetaCase};
use crate::symbols::{m_value, ModeSymbols};

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// c_E·e^{−Bx} + c_M·M(x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub c_e: Complex64,
    pub c_m: Complex64,
}

impl ExpTerm {
    /// Derivative, using ∂M = −e^{−Bx} − A·M.
    pub fn deriv(self, a: Complex64, b: Complex64) -> ExpTerm {
        ExpTerm { c_e: -b * self.c_e - self.c_m, c_m: -a * self.c_m }
    }

    pub fn eval(self, a: Complex64, b: Complex64, x: f64) -> Complex64 {
        self.c_e * (-b * x).exp() + self.c_m * m_value(a, b, x)
    }

    pub fn scaled(self, s: Complex64) -> ExpTerm {
        ExpTerm { c_e: self.c_e * s, c_m: self.c_m * s }
    }
}

/// Closed-form solution of the homogeneous surface problem for one mode,
/// per unit of (m+|ξ′|²)k̂(ξ′,0).
#[derive(Debug, Clone)]
pub struct SurfaceKernel {
    pub xi: Vec<f64>,
    pub ms: ModeSymbols,
    /// One term per velocity component, tangential first.
    pub terms: Vec<ExpTerm>,
}

impl SurfaceKernel {
    pub fn new(k: &Coefficients, xi: &[f64]) -> Result<Self> {
        let s: f64 = xi.iter().map(|x| x * x).sum();
        let ms = ModeSymbols::compute(k, s)?;
        ms.check_n()?;
        let f = ms.n_factors();
        let b = ms.core.b;
        let mut terms: Vec<ExpTerm> = xi
            .iter()
            .map(|&x| {
                let ix = I * x;
                ExpTerm { c_e: ix * (f[1] - f[0]), c_m: ix * f[0] * b }
            })
            .collect();
        terms.push(ExpTerm { c_e: f[3], c_m: f[2] * b });
        Ok(SurfaceKernel { xi: xi.to_vec(), ms, terms })
    }

    pub fn xi_sq(&self) -> f64 {
        self.ms.core.xi_sq
    }

    /// (m+|ξ′|²), the factor converting k̂(0) into the kernel amplitude.
    pub fn amplitude(&self, k0: Complex64) -> Complex64 {
        k0 * (self.ms.m + self.xi_sq())
    }

    /// ĥ(ξ′,0) = (det L/N)·k̂(ξ′,0).
    pub fn height(&self, k0: Complex64) -> Complex64 {
        self.ms.h_factor() * k0
    }

    /// Velocity and its first two normal derivatives at x.
    pub fn eval(&self, k0: Complex64, x: f64) -> [Vec<Complex64>; 3] {
        let (a, b) = (self.ms.core.a, self.ms.core.b);
        let amp = self.amplitude(k0);
        let mut out = [vec![], vec![], vec![]];
        for t in &self.terms {
            let t0 = t.scaled(amp);
            let t1 = t0.deriv(a, b);
            let t2 = t1.deriv(a, b);
            out[0].push(t0.eval(a, b, x));
            out[1].push(t1.eval(a, b, x));
            out[2].push(t2.eval(a, b, x));
        }
        out
    }
}

fn check_model_lambda(model: &Model, lambda: Complex64) -> Result<Coefficients> {
    model.coefficients(lambda)
}

fn par_modes<T: Send>(count: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..count).into_par_iter().map(f).collect()
}

/// Homogeneous surface problem from boundary data k: returns (u on the
/// normal grid, ĥ on the boundary).
pub fn solve_surface_homogeneous(
    k: &BoundaryField,
    normal: &Arc<NormalGrid>,
    model: &Model,
    lambda: Complex64,
) -> Result<(HalfSpaceField, BoundaryField)> {
    let coeffs = check_model_lambda(model, lambda)?;
    if k.components != 1 {
        return Err(LabError::ShapeMismatch("k must be scalar".into()));
    }
    k.check_finite()?;
    let k = k.to_spectral()?;
    let tg = &k.tangential;
    let n = tg.dims() + 1;
    let per_mode = par_modes(tg.mode_count(), |m| {
        let k0 = k.data[m];
        let ker = SurfaceKernel::new(&coeffs, &tg.frequency(m))?;
        let cols: Vec<Vec<Complex64>> = normal.nodes.iter().map(|&x| ker.eval(k0, x)[0].clone()).collect();
        Ok((cols, ker.height(k0)))
    })?;
    let mut u = HalfSpaceField::zeros(tg, normal, n, Domain::Spectral);
    let mut h = BoundaryField::zeros(tg, 1, Domain::Spectral);
    for (m, (cols, hh)) in per_mode.into_iter().enumerate() {
        for (i, v) in cols.iter().enumerate() {
            for c in 0..n {
                let idx = u.index(m, i, c);
                u.data[idx] = v[c];
            }
        }
        h.data[m] = hh;
    }
    Ok((u, h))
}

/// Flat Laplace–Beltrami resolvent (λ − Δ′)⁻¹ per mode.
pub fn laplace_beltrami_resolvent_flat(f: &BoundaryField, lambda: Complex64) -> Result<BoundaryField> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) || (lambda.im == 0.0 && lambda.re <= 0.0) {
        return Err(LabError::OutsideRegion { re: lambda.re, im: lambda.im });
    }
    let mut out = f.to_spectral()?;
    let tg = out.tangential.clone();
    for m in 0..tg.mode_count() {
        let s: f64 = tg.frequency(m).iter().map(|x| x * x).sum();
        let den = lambda + s;
        if den.norm() < 1e-14 {
            return Err(LabError::NearSingular(format!("|lambda + |xi|^2| = {:e}", den.norm())));
        }
        for c in 0..out.components {
            out.data[m * out.components + c] /= den;
        }
    }
    Ok(out)
}

/// Data of the flat problem with density: (d, F, G, K).
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventData {
    pub d: HalfSpaceField,
    pub f: HalfSpaceField,
    pub g: BoundaryField,
    pub k: BoundaryField,
}

/// Solution (η, u, h) of the flat problem with density.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSolution {
    pub eta: HalfSpaceField,
    pub u: HalfSpaceField,
    pub h: BoundaryField,
}

impl ResolventData {
    pub fn zeros(tangential: &TangentialGrid, normal: &Arc<NormalGrid>) -> Self {
        let n = tangential.dims() + 1;
        ResolventData {
            d: HalfSpaceField::zeros(tangential, normal, 1, Domain::Physical),
            f: HalfSpaceField::zeros(tangential, normal, n, Domain::Physical),
            g: BoundaryField::zeros(tangential, n, Domain::Physical),
            k: BoundaryField::zeros(tangential, 1, Domain::Physical),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.f.tangential.dims() + 1;
        if self.d.components != 1 || self.f.components != n || self.g.components != n || self.k.components != 1 {
            return Err(LabError::ShapeMismatch("data components must be (1, N, N, 1)".into()));
        }
        if !self.d.compatible(&self.f)
            || self.g.tangential != self.f.tangential
            || self.k.tangential != self.f.tangential
        {
            return Err(LabError::ShapeMismatch("data fields live on different grids".into()));
        }
        self.d.check_finite()?;
        self.f.check_finite()?;
        self.g.check_finite()?;
        self.k.check_finite()
    }

    pub fn to_spectral(&self) -> Result<Self> {
        Ok(ResolventData {
            d: self.d.to_spectral()?,
            f: self.f.to_spectral()?,
            g: self.g.to_spectral()?,
            k: self.k.to_spectral()?,
        })
    }

    /// a·self + b·other.
    pub fn combine(&self, a: Complex64, other: &ResolventData, b: Complex64) -> Result<Self> {
        let x = self.to_spectral()?;
        let y = other.to_spectral()?;
        Ok(ResolventData {
            d: x.d.scaled(a).axpy(b, &y.d)?,
            f: x.f.scaled(a).axpy(b, &y.f)?,
            g: x.g.scaled(a).axpy(b, &y.g)?,
            k: x.k.scaled(a).axpy(b, &y.k)?,
        })
    }

    pub fn tangential(&self) -> &TangentialGrid {
        &self.f.tangential
    }

    pub fn normal(&self) -> &Arc<NormalGrid> {
        &self.f.normal
    }
}

impl ResolventSolution {
    pub fn to_physical(&self) -> Result<Self> {
        Ok(ResolventSolution { eta: self.eta.to_physical()?, u: self.u.to_physical()?, h: self.h.to_physical()? })
    }
}

/// Column of component `c` from a node-major block with `nc` components.
pub(crate) fn block_col(block: &[Complex64], nc: usize, c: usize) -> Vec<Complex64> {
    block.iter().skip(c).step_by(nc).copied().collect()
}

/// Reduced problem for one mode: Lamé part with (f, G′), then the surface
/// part with K − v_N(0). Returns (u block, ĥ).
pub(crate) fn reduced_mode(
    coeffs: &Coefficients,
    xi: &[f64],
    grid: &NormalGrid,
    f_block: &[Complex64],
    g_prime: &[Complex64],
    k0: Complex64,
) -> Result<(Vec<Complex64>, Complex64)> {
    let n = xi.len() + 1;
    let mut u = lame_mode(coeffs, xi, grid, f_block, g_prime)?;
    let ker = SurfaceKernel::new(coeffs, xi)?;
    let kc = k0 - u[n - 1];
    for (i, &x) in grid.nodes.iter().enumerate() {
        let w = &ker.eval(kc, x)[0];
        for c in 0..n {
            u[i * n + c] += w[c];
        }
    }
    Ok((u, ker.height(kc)))
}

/// Reduced problem without density: λu − αΔu − (α+β+ζ′)∇div u = F with the
/// stress rows driven by G′ = G/γ₁ and λh + u_N = K. Uses the model's ζ case.
pub fn solve_reduced_resolvent(
    f: &HalfSpaceField,
    g: &BoundaryField,
    k: &BoundaryField,
    model: &Model,
    lambda: Complex64,
) -> Result<(HalfSpaceField, BoundaryField)> {
    let coeffs = check_model_lambda(model, lambda)?;
    let n = f.tangential.dims() + 1;
    if f.components != n || g.components != n || k.components != 1 {
        return Err(LabError::ShapeMismatch("data components must be (N, N, 1)".into()));
    }
    let (f, g, k) = (f.to_spectral()?, g.to_spectral()?, k.to_spectral()?);
    let tg = f.tangential.clone();
    let grid = f.normal.clone();
    let gamma1 = model.fluid.gamma1;
    let per_mode = par_modes(tg.mode_count(), |m| {
        let gp: Vec<Complex64> = (0..n).map(|c| g.at(m, c) / gamma1).collect();
        reduced_mode(&coeffs, &tg.frequency(m), &grid, f.mode_block(m), &gp, k.data[m])
    })?;
    let mut u = HalfSpaceField::zeros(&tg, &grid, n, Domain::Spectral);
    let mut h = BoundaryField::zeros(&tg, 1, Domain::Spectral);
    let w = grid.len() * n;
    for (m, (block, hh)) in per_mode.into_iter().enumerate() {
        u.data[m * w..(m + 1) * w].copy_from_slice(&block);
        h.data[m] = hh;
    }
    Ok((u, h))
}

/// The model with ζ′ = γ₃/(γ₁λ), the case produced by eliminating the density.
pub fn density_model(model: &Model) -> Model {
    let mut m = *model;
    m.sector.zeta_case = ZetaCase::C1;
    m.fluid.zeta = Complex64::new(0.0, 0.0);
    m
}

/// Full problem with density: eliminate η, solve the reduced problem in
/// case C1 with γ₂ = γ₃/γ₁, then recover η = λ⁻¹(d − γ₁ div u).
pub fn solve_full_resolvent(data: &ResolventData, model: &Model, lambda: Complex64) -> Result<ResolventSolution> {
    data.validate()?;
    let dm = density_model(model);
    let coeffs = check_model_lambda(&dm, lambda)?;
    let data = data.to_spectral()?;
    let tg = data.tangential().clone();
    let grid = data.normal().clone();
    let n = tg.dims() + 1;
    let nn = grid.len();
    let (g1, g3) = (model.fluid.gamma1, model.fluid.gamma3);
    let g2 = g3 / g1;
    let per_mode = par_modes(tg.mode_count(), |m| {
        let xi = tg.frequency(m);
        let d = data.d.column(m, 0);
        let dd = grid.apply(grid.d1(), &d);
        let fb = data.f.mode_block(m);
        let mut f = vec![ZERO; nn * n];
        for i in 0..nn {
            for c in 0..n {
                let grad = if c + 1 < n { I * xi[c] * d[i] } else { dd[i] };
                f[i * n + c] = (fb[i * n + c] - grad * g2 / lambda) / g1;
            }
        }
        let mut gp: Vec<Complex64> = (0..n).map(|c| data.g.at(m, c)).collect();
        gp[n - 1] -= g2 * d[0] / lambda;
        gp.iter_mut().for_each(|z| *z /= g1);
        let (u, h) = reduced_mode(&coeffs, &xi, &grid, &f, &gp, data.k.data[m])?;
        let div = divergence(&u, &xi, &grid);
        let eta: Vec<Complex64> = (0..nn).map(|i| (d[i] - g1 * div[i]) / lambda).collect();
        Ok((u, eta, h))
    })?;
    let mut u = HalfSpaceField::zeros(&tg, &grid, n, Domain::Spectral);
    let mut eta = HalfSpaceField::zeros(&tg, &grid, 1, Domain::Spectral);
    let mut h = BoundaryField::zeros(&tg, 1, Domain::Spectral);
    for (m, (ub, eb, hh)) in per_mode.into_iter().enumerate() {
        u.data[m * nn * n..(m + 1) * nn * n].copy_from_slice(&ub);
        eta.data[m * nn..(m + 1) * nn].copy_from_slice(&eb);
        h.data[m] = hh;
    }
    Ok(ResolventSolution { eta, u, h })
}

/// iξ′·û′ + ∂_N û_N on the nodes, from a node-major block.
pub fn divergence(block: &[Complex64], xi: &[f64], grid: &NormalGrid) -> Vec<Complex64> {
    let n = xi.len() + 1;
    let un = block_col(block, n, n - 1);
    let mut div = grid.apply(grid.d1(), &un);
    for (c, &x) in xi.iter().enumerate() {
        for (i, v) in block_col(block, n, c).into_iter().enumerate() {
            div[i] += I * x * v;
        }
    }
    div
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TangentialGrid;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn grid() -> Arc<NormalGrid> {
        Arc::new(NormalGrid::mapped(64, 40.0, 4.0).unwrap())
    }

    #[test]
    fn zero_mode_baseline_height() {
        let model = Model::baseline();
        let tg = TangentialGrid::line(8, 4.0).unwrap();
        let mut k = BoundaryField::zeros(&tg, 1, Domain::Spectral);
        k.data[0] = c(1.0);
        let (u, h) = solve_surface_homogeneous(&k, &grid(), &model, c(1.0)).unwrap();
        let want = 2f64.sqrt() / (1.0 + 2f64.sqrt());
        assert!((h.data[0] - c(want)).norm() < 1e-12);
        assert!((h.data[0] + u.at(0, 0, 1) - c(1.0)).norm() < 1e-12);
        // no tangential velocity at ξ′ = 0
        assert!(u.column(0, 0).iter().all(|z| z.norm() == 0.0));
        for m in 1..8 {
            assert_eq!(h.data[m], c(0.0));
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let model = Model::baseline();
        let tg = TangentialGrid::line(8, 4.0).unwrap();
        let k = BoundaryField::zeros(&tg, 1, Domain::Physical);
        let (u, h) = solve_surface_homogeneous(&k, &grid(), &model, c(2.0)).unwrap();
        assert!(u.data.iter().chain(&h.data).all(|z| z.norm() == 0.0));
    }

    /// Interior, stress and kinematic rows checked with analytic derivatives.
    #[test]
    fn closed_form_satisfies_the_mode_system() {
        let model = Model::baseline();
        for (lam, xi) in [(c(1.0), 0.0), (c(4.0), 0.7), (Complex64::new(2.0, 5.0), 3.0), (Complex64::new(1.0, 9.0), 0.01)] {
            let k = model.coefficients(lam).unwrap();
            let ker = SurfaceKernel::new(&k, &[xi]).unwrap();
            let k0 = Complex64::new(0.3, -1.1);
            let h = ker.height(k0);
            let cc = k.alpha + k.beta + k.zeta;
            let ix = I * xi;
            let s = xi * xi;
            let scale = (k0 * (k.m + s)).norm();
            for x in [0.0, 0.05, 0.7, 3.0] {
                let [u, du, d2u] = ker.eval(k0, x);
                let div = ix * u[0] + du[1];
                let ddiv = ix * du[0] + d2u[1];
                let r1 = (lam + k.alpha * s) * u[0] - k.alpha * d2u[0] - cc * ix * div;
                let r2 = (lam + k.alpha * s) * u[1] - k.alpha * d2u[1] - cc * ddiv;
                let w = lam.norm() + s + 1.0;
                assert!(r1.norm() < 1e-10 * scale * w, "{lam} {xi} {x} {}", r1.norm());
                assert!(r2.norm() < 1e-10 * scale * w, "{lam} {xi} {x} {}", r2.norm());
                if x == 0.0 {
                    let t = k.alpha * (du[0] + ix * u[1]);
                    let nrm = 2.0 * k.alpha * du[1] + (k.beta + k.zeta) * div + k.sigma * (k.m + s) * h;
                    assert!(t.norm() < 1e-8 * scale * w, "{}", t.norm());
                    assert!(nrm.norm() < 1e-8 * scale * w, "{}", nrm.norm());
                    assert!((lam * h + u[1] - k0).norm() < 1e-10 * k0.norm());
                }
            }
        }
    }

    #[test]
    fn lb_resolvent_is_exact_inverse() {
        let tg = TangentialGrid::line(16, std::f64::consts::PI).unwrap();
        let mut f = BoundaryField::zeros(&tg, 1, Domain::Spectral);
        f.data[1] = c(1.0);
        let g = laplace_beltrami_resolvent_flat(&f, c(1.0)).unwrap();
        assert!((g.data[1] - c(0.5)).norm() < 1e-15);
        let f = BoundaryField::from_spectral_fn(&tg, 1, |x| vec![Complex64::new(x[0].cos(), x[0])]);
        let lam = Complex64::new(0.5, 2.0);
        let g = laplace_beltrami_resolvent_flat(&f, lam).unwrap();
        for m in 0..16 {
            let s = tg.frequency(m)[0].powi(2);
            assert!(((lam + s) * g.data[m] - f.data[m]).norm() <= 1e-13 * f.data[m].norm().max(1e-300));
        }
        assert!(laplace_beltrami_resolvent_flat(&f, c(-1.0)).is_err());
    }

    #[test]
    fn full_resolvent_zero_data() {
        let model = Model::baseline();
        let tg = TangentialGrid::line(8, 4.0).unwrap();
        let data = ResolventData::zeros(&tg, &grid());
        let sol = solve_full_resolvent(&data, &model, c(4.0)).unwrap();
        assert!(sol.u.data.iter().chain(&sol.eta.data).chain(&sol.h.data).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn surface_rejects_outside_region() {
        let model = Model::baseline();
        let tg = TangentialGrid::line(8, 4.0).unwrap();
        let k = BoundaryField::zeros(&tg, 1, Domain::Physical);
        assert!(matches!(
            solve_surface_homogeneous(&k, &grid(), &model, c(-5.0)),
            Err(LabError::OutsideRegion { .. })
        ));
    }
}
