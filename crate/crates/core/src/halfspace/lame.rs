//! Lamé system with stress boundary rows, solved per mode by Chebyshev
//! collocation. Decay at infinity is imposed as v = 0 at x_N = X.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{I, ZERO};
use crate::error::{LabError, Result};
use crate::grid::{BoundaryField, Domain, HalfSpaceField, NormalGrid};
use crate::params::{Coefficients, Model};

/// One mode: unknowns v_c at node i stored at i·N + c.
pub fn lame_mode(
    k: &Coefficients,
    xi: &[f64],
    grid: &NormalGrid,
    f_block: &[Complex64],
    g_prime: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = xi.len() + 1;
    let nn = grid.len();
    let size = n * nn;
    if f_block.len() != size || g_prime.len() != n {
        return Err(LabError::ShapeMismatch("Lamé data does not match the grid".into()));
    }
    let s: f64 = xi.iter().map(|x| x * x).sum();
    let (d1, d2) = (grid.d1(), grid.d2());
    let alpha = k.alpha;
    let cc = k.alpha + k.beta + k.zeta;
    let bz = k.beta + k.zeta;
    let diag = k.lambda + alpha * s;
    let ix: Vec<Complex64> = xi.iter().map(|&x| I * x).collect();
    let mut a = DMatrix::<Complex64>::zeros(size, size);
    let mut rhs = vec![ZERO; size];
    let col = |node: usize, comp: usize| node * n + comp;

    for i in 1..nn - 1 {
        for c in 0..n {
            let r = col(i, c);
            rhs[r] = f_block[r];
            a[(r, r)] += diag;
            for j in 0..nn {
                a[(r, col(j, c))] -= alpha * d2[(i, j)];
            }
            if c + 1 < n {
                // −c·iξ_c·(iξ′·v′ + ∂v_N)
                for (l, &il) in ix.iter().enumerate() {
                    a[(r, col(i, l))] -= cc * ix[c] * il;
                }
                for j in 0..nn {
                    a[(r, col(j, n - 1))] -= cc * ix[c] * d1[(i, j)];
                }
            } else {
                // −c·∂(iξ′·v′ + ∂v_N)
                for (l, &il) in ix.iter().enumerate() {
                    for j in 0..nn {
                        a[(r, col(j, l))] -= cc * il * d1[(i, j)];
                    }
                }
                for j in 0..nn {
                    a[(r, col(j, n - 1))] -= cc * d2[(i, j)];
                }
            }
        }
    }
    // stress rows at x_N = 0
    for c in 0..n {
        let r = col(0, c);
        rhs[r] = -g_prime[c];
        if c + 1 < n {
            for j in 0..nn {
                a[(r, col(j, c))] += alpha * d1[(0, j)];
            }
            a[(r, col(0, n - 1))] += alpha * ix[c];
        } else {
            for j in 0..nn {
                a[(r, col(j, n - 1))] += (2.0 * alpha + bz) * d1[(0, j)];
            }
            for (l, &il) in ix.iter().enumerate() {
                a[(r, col(0, l))] += bz * il;
            }
        }
    }
    for c in 0..n {
        let r = col(nn - 1, c);
        a[(r, r)] = Complex64::new(1.0, 0.0);
    }
    let lu = a.lu();
    let sol = lu
        .solve(&nalgebra::DVector::from_vec(rhs))
        .ok_or_else(|| LabError::SingularSystem(format!("Lamé collocation matrix is singular at xi = {xi:?}")))?;
    if sol.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(LabError::SingularSystem(format!("Lamé solve produced non-finite values at xi = {xi:?}")));
    }
    Ok(sol.iter().copied().collect())
}

/// Solves the Lamé system with boundary data G′ (already divided by γ₁).
pub fn solve_lame_bvp(f: &HalfSpaceField, g_prime: &BoundaryField, model: &Model, lambda: Complex64) -> Result<HalfSpaceField> {
    let coeffs = model.coefficients(lambda)?;
    let n = f.tangential.dims() + 1;
    if f.components != n || g_prime.components != n || g_prime.tangential != f.tangential {
        return Err(LabError::ShapeMismatch("F and G' must be N-vectors on the same grid".into()));
    }
    f.check_finite()?;
    g_prime.check_finite()?;
    let f = f.to_spectral()?;
    let g = g_prime.to_spectral()?;
    let tg = &f.tangential;
    let grid = f.normal.clone();
    let blocks: Vec<Vec<Complex64>> = (0..tg.mode_count())
        .into_par_iter()
        .map(|m| {
            let gp: Vec<Complex64> = (0..n).map(|c| g.at(m, c)).collect();
            lame_mode(&coeffs, &tg.frequency(m), &grid, f.mode_block(m), &gp)
        })
        .collect::<Result<_>>()?;
    let mut v = HalfSpaceField::zeros(tg, &grid, n, Domain::Spectral);
    let w = grid.len() * n;
    for (m, b) in blocks.into_iter().enumerate() {
        v.data[m * w..(m + 1) * w].copy_from_slice(&b);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TangentialGrid;
    use std::sync::Arc;

    #[test]
    fn zero_data_zero_solution() {
        let model = Model::baseline();
        let tg = TangentialGrid::line(8, 3.0).unwrap();
        let ng = Arc::new(NormalGrid::mapped(32, 40.0, 4.0).unwrap());
        let f = HalfSpaceField::zeros(&tg, &ng, 2, Domain::Physical);
        let g = BoundaryField::zeros(&tg, 2, Domain::Physical);
        let v = solve_lame_bvp(&f, &g, &model, Complex64::new(2.0, 1.0)).unwrap();
        assert!(v.data.iter().all(|z| z.norm() == 0.0));
    }
}
