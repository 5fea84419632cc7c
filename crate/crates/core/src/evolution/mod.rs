//! Per-mode semigroup of the linear problem: generator matrices, inverse
//! Laplace propagation along a hyperbola, and an exponential oracle.

mod contour;
mod expm;
mod maxreg;

pub use contour::{inverse_laplace, inverse_laplace_many, propagate_contour, ContourSpec, DEFAULT_NODES};
pub use expm::{matrix_exponential_oracle, EXPM_MAX_DIM};
pub use maxreg::{maximal_regularity_norms, write_time_series_csv, MaxRegReport, TimeSample};

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::NormalGrid;
use crate::params::FluidParams;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Generator of one tangential mode acting on (η at all nodes, u at the
/// interior nodes, h). The wall value u(0) is eliminated through the two
/// stress rows and u(X) = 0, so the matrix is square with 3n − 3 rows for
/// N = 2.
#[derive(Debug, Clone)]
pub struct PerModeGenerator {
    pub xi: Vec<f64>,
    pub grid: Arc<NormalGrid>,
    pub params: FluidParams,
    pub matrix: DMatrix<Complex64>,
    /// u(0) = border · state.
    border: DMatrix<Complex64>,
}

/// Unpacked state of one mode; `u` holds every node, node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub eta: Vec<Complex64>,
    pub u: Vec<Complex64>,
    pub h: Complex64,
}

impl PerModeGenerator {
    pub fn components(&self) -> usize {
        self.xi.len() + 1
    }

    pub fn dim(&self) -> usize {
        state_dim(self.grid.len(), self.components())
    }

    /// Packs η, interior u and h; boundary nodes of `u` are ignored.
    pub fn pack(&self, s: &ModeState) -> Result<Vec<Complex64>> {
        let (nn, nc) = (self.grid.len(), self.components());
        if s.eta.len() != nn || s.u.len() != nn * nc {
            return Err(LabError::ShapeMismatch("mode state does not match the grid".into()));
        }
        let mut v = s.eta.clone();
        v.extend_from_slice(&s.u[nc..(nn - 1) * nc]);
        v.push(s.h);
        Ok(v)
    }

    /// Unpacks a state vector, filling u(0) from the boundary rows.
    pub fn unpack(&self, v: &[Complex64]) -> Result<ModeState> {
        if v.len() != self.dim() {
            return Err(LabError::ShapeMismatch(format!("state length {} != {}", v.len(), self.dim())));
        }
        Ok(unpack_with(&self.border, self.grid.len(), self.components(), v))
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim() {
            return Err(LabError::ShapeMismatch("state length does not match the generator".into()));
        }
        Ok((0..self.dim()).map(|i| (0..self.dim()).map(|j| self.matrix[(i, j)] * v[j]).sum()).collect())
    }

    /// Per-mode Sobolev norm of a column: Σ_{a+b≤k} |ξ′|^{2a}‖∂^b f‖².
    fn column_hk(&self, f: &[Complex64], k: usize) -> f64 {
        let s: f64 = self.xi.iter().map(|x| x * x).sum();
        let w = self.grid.weights();
        let mut g = f.to_vec();
        let mut total = 0.0;
        for b in 0..=k {
            let l2: f64 = g.iter().zip(w).map(|(z, wi)| wi * z.norm_sqr()).sum();
            total += (0..=k - b).map(|a| s.powi(a as i32)).sum::<f64>() * l2;
            if b < k {
                g = self.grid.apply(self.grid.d1(), &g);
            }
        }
        total
    }

    /// ‖η‖_{H¹} + ‖u‖_{H^k} + (1+|ξ′|²)^{s/2}|h| for one mode, q = 2.
    pub fn state_norm(&self, v: &[Complex64], u_order: usize, h_order: f64) -> Result<f64> {
        let st = self.unpack(v)?;
        let nc = self.components();
        let eta = self.column_hk(&st.eta, 1).sqrt();
        let u: f64 = (0..nc)
            .map(|c| {
                let col: Vec<Complex64> = st.u.iter().skip(c).step_by(nc).copied().collect();
                self.column_hk(&col, u_order)
            })
            .sum::<f64>()
            .sqrt();
        let s: f64 = self.xi.iter().map(|x| x * x).sum();
        Ok(eta + u + (1.0 + s).powf(h_order / 2.0) * st.h.norm())
    }

    /// Norm of the state space: η ∈ H¹, u ∈ L₂, h ∈ W^{2−1/q}.
    pub fn x_norm(&self, v: &[Complex64], q: f64) -> Result<f64> {
        self.state_norm(v, 0, 2.0 - 1.0 / q)
    }

    /// Norm of the domain: η ∈ H¹, u ∈ H², h ∈ W^{3−1/q}.
    pub fn domain_norm(&self, v: &[Complex64], q: f64) -> Result<f64> {
        self.state_norm(v, 2, 3.0 - 1.0 / q)
    }
}

pub fn state_dim(nodes: usize, comps: usize) -> usize {
    nodes + (nodes - 2) * comps + 1
}

fn unpack_with(border: &DMatrix<Complex64>, nn: usize, nc: usize, v: &[Complex64]) -> ModeState {
    let eta = v[..nn].to_vec();
    let mut u = vec![ZERO; nn * nc];
    u[nc..(nn - 1) * nc].copy_from_slice(&v[nn..nn + (nn - 2) * nc]);
    for c in 0..nc {
        u[c] = (0..v.len()).map(|j| border[(c, j)] * v[j]).sum();
    }
    ModeState { eta, u, h: v[v.len() - 1] }
}

/// Assembles the generator of one mode:
/// η ↦ −γ₁div u, u ↦ γ₁⁻¹(μΔu + ν∇div u − γ₂∇η), h ↦ −u_N(0),
/// with S(u)n − γ₂ηn + σ(m+|ξ′|²)h n = 0 at x_N = 0 and u = 0 at x_N = X.
pub fn build_generator(xi: &[f64], params: &FluidParams, grid: &Arc<NormalGrid>) -> Result<PerModeGenerator> {
    params.validate()?;
    let nn = grid.len();
    if nn < 4 {
        return Err(LabError::InvalidParameter("generator needs at least 4 normal nodes".into()));
    }
    let nc = xi.len() + 1;
    let dim = state_dim(nn, nc);
    let (mu, nu, g1, sigma, m) = (params.mu, params.nu, params.gamma1, params.sigma, params.m);
    let g2 = params.gamma3 / params.gamma1;
    let s: f64 = xi.iter().map(|x| x * x).sum();
    let (d1, d2) = (grid.d1(), grid.d2());

    // S·u(0) = R·state from the stress rows
    let mut smat = DMatrix::<Complex64>::zeros(nc, nc);
    let mut rmat = DMatrix::<Complex64>::zeros(nc, dim);
    let iu = |i: usize, c: usize| nn + (i - 1) * nc + c;
    for j in 0..nc - 1 {
        smat[(j, j)] += mu * d1[(0, 0)];
        smat[(j, nc - 1)] += mu * I * xi[j];
        for i in 1..nn - 1 {
            rmat[(j, iu(i, j))] -= Complex64::from(mu * d1[(0, i)]);
        }
    }
    let r = nc - 1;
    smat[(r, r)] += (mu + nu) * d1[(0, 0)];
    for l in 0..nc - 1 {
        smat[(r, l)] += (nu - mu) * I * xi[l];
    }
    for i in 1..nn - 1 {
        rmat[(r, iu(i, r))] -= Complex64::from((mu + nu) * d1[(0, i)]);
    }
    rmat[(r, 0)] += g2;
    rmat[(r, dim - 1)] -= sigma * (m + s);
    let border = smat
        .lu()
        .solve(&rmat)
        .ok_or_else(|| LabError::SingularSystem(format!("boundary bordering is singular at xi = {xi:?}")))?;

    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    let mut e = vec![ZERO; dim];
    for col in 0..dim {
        e.iter_mut().for_each(|z| *z = ZERO);
        e[col] = Complex64::new(1.0, 0.0);
        let st = unpack_with(&border, nn, nc, &e);
        let cols: Vec<Vec<Complex64>> = (0..nc).map(|c| st.u.iter().skip(c).step_by(nc).copied().collect()).collect();
        let mut div = grid.apply(d1, &cols[nc - 1]);
        for (l, &x) in xi.iter().enumerate() {
            for i in 0..nn {
                div[i] += I * x * cols[l][i];
            }
        }
        let ddiv = grid.apply(d1, &div);
        let deta = grid.apply(d1, &st.eta);
        for i in 0..nn {
            matrix[(i, col)] = -g1 * div[i];
        }
        for c in 0..nc {
            let lap = grid.apply(d2, &cols[c]);
            for i in 1..nn - 1 {
                let (gd, ge) = if c + 1 < nc { (I * xi[c] * div[i], I * xi[c] * st.eta[i]) } else { (ddiv[i], deta[i]) };
                let v = mu * (lap[i] - s * cols[c][i]) + nu * gd - g2 * ge;
                matrix[(iu(i, c), col)] = v / g1;
            }
        }
        matrix[(dim - 1, col)] = -st.u[nc - 1];
    }
    if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(LabError::SingularSystem("generator has non-finite entries".into()));
    }
    Ok(PerModeGenerator { xi: xi.to_vec(), grid: grid.clone(), params: *params, matrix, border })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<NormalGrid> {
        Arc::new(NormalGrid::mapped(n, 40.0, 4.0).unwrap())
    }

    #[test]
    fn dimension_and_zero_image() {
        let g = build_generator(&[0.7], &FluidParams::baseline(), &grid(24)).unwrap();
        assert_eq!(g.dim(), 3 * 24 - 3);
        let z = g.apply(&vec![ZERO; g.dim()]).unwrap();
        assert!(z.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn constant_velocity_has_no_density_image_at_zero_mode() {
        let gr = grid(24);
        let g = build_generator(&[0.0], &FluidParams::baseline(), &gr).unwrap();
        let nn = gr.len();
        // constant tangential velocity satisfies both stress rows at ξ′ = 0
        let st = ModeState {
            eta: vec![ZERO; nn],
            u: (0..nn * 2).map(|k| if k % 2 == 0 { Complex64::new(1.0, 0.0) } else { ZERO }).collect(),
            h: ZERO,
        };
        let v = g.pack(&st).unwrap();
        let out = g.apply(&v).unwrap();
        for i in 1..nn - 1 {
            assert!(out[i].norm() < 1e-10);
        }
    }
}
