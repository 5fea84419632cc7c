//! Independent checks: residuals of the flat problem, discrete norms, the
//! randomized R-bound estimator and the semigroup estimate.

mod norms;
mod rbound;
mod semigroup;

pub use norms::{boundary_norm, discrete_norm, time_norm, NormSpec};
pub use rbound::{measured_operator_norm, rbound_estimate, resolvent_operator, Operator, RBoundReport, RBoundSpec};
pub use semigroup::{semigroup_estimate_check, SemigroupReport};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::halfspace::{divergence, ResolventData, ResolventSolution};
use crate::params::Model;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One equation of the flat problem.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub name: String,
    pub absolute: f64,
    /// Absolute residual over the sum of the norms of the terms in the row.
    pub relative: f64,
    /// Tangential index of the largest per-mode residual.
    pub worst_mode: usize,
    pub worst_frequency: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
    pub max_relative: f64,
    pub tangential_points: Vec<usize>,
    pub normal_nodes: usize,
    pub x_max: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn row(&self, name: &str) -> Option<&ResidualRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// Default tolerance on the relative residual of the full problem.
pub const RESIDUAL_TOL: f64 = 1e-6;

struct Acc {
    name: &'static str,
    res: Vec<f64>,
    terms: Vec<f64>,
}

impl Acc {
    fn new(name: &'static str, modes: usize, terms: usize) -> Self {
        Acc { name, res: vec![0.0; modes], terms: vec![0.0; terms] }
    }
}

/// Residuals of the five equations of the flat problem with density,
/// λη + γ₁div u = d, γ₁λu − Div(S(u) − γ₂ηI) = F, the two stress rows and
/// λh + u_N = K, with n = −e_N. Interior rows use nodes 1..n−2.
pub fn pde_residual(sol: &ResolventSolution, data: &ResolventData, model: &Model, lambda: Complex64) -> Result<ResidualReport> {
    data.validate()?;
    let n = data.tangential().dims() + 1;
    if sol.u.components != n || sol.eta.components != 1 || sol.h.components != 1 {
        return Err(LabError::ShapeMismatch("solution components must be (1, N, 1)".into()));
    }
    if !sol.u.compatible(&data.f) || !sol.eta.compatible(&data.d) || sol.h.tangential != data.k.tangential {
        return Err(LabError::ShapeMismatch("solution and data live on different grids".into()));
    }
    let data = data.to_spectral()?;
    let u = sol.u.to_spectral()?;
    let eta = sol.eta.to_spectral()?;
    let h = sol.h.to_spectral()?;
    let tg = data.tangential().clone();
    let grid = data.normal().clone();
    let nn = grid.len();
    let modes = tg.mode_count();
    let p = &model.fluid;
    let (mu, nu, g1, sigma, m) = (p.mu, p.nu, p.gamma1, p.sigma, p.m);
    let g2 = p.gamma3 / p.gamma1;
    let w = grid.weights();
    // Parseval on the box: ∫|f|² = V⁻¹ Σ|f̂|²
    let vol = tg.box_volume();

    let mut dens = Acc::new("density", modes, 3);
    let mut mom = Acc::new("momentum", modes, 5);
    let mut tan = Acc::new("tangential_stress", modes, 3);
    let mut nor = Acc::new("normal_stress", modes, 5);
    let mut kin = Acc::new("kinematic", modes, 3);

    for mode in 0..modes {
        let xi = tg.frequency(mode);
        let s: f64 = xi.iter().map(|x| x * x).sum();
        let ub = u.mode_block(mode);
        let div = divergence(ub, &xi, &grid);
        let e = eta.column(mode, 0);
        let de = grid.apply(grid.d1(), &e);
        let d = data.d.column(mode, 0);
        let cols: Vec<Vec<Complex64>> = (0..n).map(|c| u.column(mode, c)).collect();
        let d1c: Vec<Vec<Complex64>> = cols.iter().map(|c| grid.apply(grid.d1(), c)).collect();
        let d2c: Vec<Vec<Complex64>> = cols.iter().map(|c| grid.apply(grid.d2(), c)).collect();
        let ddiv = grid.apply(grid.d1(), &div);

        for i in 1..nn - 1 {
            let wi = w[i] / vol;
            let t = [lambda * e[i], g1 * div[i], d[i]];
            dens.res[mode] += wi * (t[0] + t[1] - t[2]).norm_sqr();
            for (k, z) in t.iter().enumerate() {
                dens.terms[k] += wi * z.norm_sqr();
            }
            let mut r2 = 0.0;
            let mut t2 = [0.0; 5];
            for c in 0..n {
                let grad = |v: &[Complex64], dv: &[Complex64]| if c + 1 < n { I * xi[c] * v[i] } else { dv[i] };
                let terms = [
                    g1 * lambda * cols[c][i],
                    -mu * (d2c[c][i] - s * cols[c][i]),
                    -nu * grad(&div, &ddiv),
                    g2 * grad(&e, &de),
                    data.f.at(mode, i, c),
                ];
                r2 += (terms[0] + terms[1] + terms[2] + terms[3] - terms[4]).norm_sqr();
                for (k, z) in terms.iter().enumerate() {
                    t2[k] += z.norm_sqr();
                }
            }
            mom.res[mode] += wi * r2;
            for k in 0..5 {
                mom.terms[k] += wi * t2[k];
            }
        }

        let bw = 1.0 / vol;
        let mut rt = 0.0;
        let mut tt = [0.0; 3];
        for c in 0..n - 1 {
            let terms = [-mu * d1c[c][0], -mu * I * xi[c] * cols[n - 1][0], data.g.at(mode, c)];
            rt += (terms[0] + terms[1] - terms[2]).norm_sqr();
            for (k, z) in terms.iter().enumerate() {
                tt[k] += z.norm_sqr();
            }
        }
        tan.res[mode] = bw * rt;
        for k in 0..3 {
            tan.terms[k] += bw * tt[k];
        }

        let hm = h.data[mode];
        let terms = [
            -2.0 * mu * d1c[n - 1][0],
            -(nu - mu) * div[0],
            g2 * e[0],
            -sigma * (m + s) * hm,
            data.g.at(mode, n - 1),
        ];
        nor.res[mode] = bw * (terms[0] + terms[1] + terms[2] + terms[3] - terms[4]).norm_sqr();
        for (k, z) in terms.iter().enumerate() {
            nor.terms[k] += bw * z.norm_sqr();
        }

        let terms = [lambda * hm, cols[n - 1][0], data.k.data[mode]];
        kin.res[mode] = bw * (terms[0] + terms[1] - terms[2]).norm_sqr();
        for (k, z) in terms.iter().enumerate() {
            kin.terms[k] += bw * z.norm_sqr();
        }
    }

    let rows: Vec<ResidualRow> = [dens, mom, tan, nor, kin]
        .into_iter()
        .map(|a| {
            let absolute = a.res.iter().sum::<f64>().sqrt();
            let scale: f64 = a.terms.iter().map(|t| t.sqrt()).sum();
            let relative = if scale > 0.0 { absolute / scale } else { absolute };
            let worst_mode = a
                .res
                .iter()
                .enumerate()
                .fold((0, -1.0), |b, (k, &v)| if v > b.1 { (k, v) } else { b })
                .0;
            ResidualRow { name: a.name.into(), absolute, relative, worst_mode, worst_frequency: tg.frequency(worst_mode) }
        })
        .collect();
    let max_relative = rows.iter().map(|r| r.relative).fold(0.0, f64::max);
    Ok(ResidualReport {
        rows,
        max_relative,
        tangential_points: tg.points.clone(),
        normal_nodes: nn,
        x_max: grid.x_max,
        tolerance: RESIDUAL_TOL,
        pass: max_relative <= RESIDUAL_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    const ZERO: Complex64 = Complex64::new(0.0, 0.0);
    use crate::grid::{NormalGrid, TangentialGrid};
    use crate::halfspace::solve_full_resolvent;
    use std::sync::Arc;

    fn setup() -> (Model, ResolventData) {
        let model = Model::baseline();
        let tg = TangentialGrid::line(32, 8.0).unwrap();
        let ng = Arc::new(NormalGrid::mapped(64, 40.0, 4.0).unwrap());
        let mut data = ResolventData::zeros(&tg, &ng);
        let g = |x: f64, y: f64| Complex64::new((-x * x - (y - 2.0).powi(2)).exp(), 0.0);
        data.d = crate::grid::HalfSpaceField::from_fn(&tg, &ng, 1, |x, y| vec![g(x[0], y)]);
        data.f = crate::grid::HalfSpaceField::from_fn(&tg, &ng, 2, |x, y| vec![g(x[0] - 0.5, y), g(x[0], y) * 0.5]);
        data.k = crate::grid::BoundaryField::from_fn(&tg, 1, |x| vec![Complex64::new((-x[0] * x[0]).exp(), 0.0)]);
        (model, data)
    }

    #[test]
    fn zero_solution_reports_the_data_norm() {
        let (model, data) = setup();
        let lambda = Complex64::new(4.0, 0.0);
        let sol = ResolventSolution {
            eta: data.d.scaled(ZERO),
            u: data.f.scaled(ZERO),
            h: data.k.scaled(ZERO),
        };
        let r = pde_residual(&sol, &data, &model, lambda).unwrap();
        for row in &r.rows {
            assert!(row.relative <= 1.0 + 1e-12);
        }
        assert!((r.row("kinematic").unwrap().relative - 1.0).abs() < 1e-12);
        assert!(r.rows.iter().all(|row| row.absolute >= 0.0));
    }

    #[test]
    fn solver_output_is_consistent_and_noise_is_detected() {
        let (model, data) = setup();
        let lambda = Complex64::new(4.0, 0.0);
        let sol = solve_full_resolvent(&data, &model, lambda).unwrap();
        let r = pde_residual(&sol, &data, &model, lambda).unwrap();
        assert!(r.max_relative < 1e-6, "{r:?}");
        let mut noisy = sol.clone();
        let scale = noisy.u.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (k, z) in noisy.u.data.iter_mut().enumerate() {
            *z += scale * 1e-3 * ((k as f64 * 0.7).sin());
        }
        let r2 = pde_residual(&noisy, &data, &model, lambda).unwrap();
        assert!(r2.max_relative >= 1e-4);
    }
}
