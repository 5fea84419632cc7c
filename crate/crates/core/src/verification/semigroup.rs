use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::evolution::{propagate_contour, ContourSpec};
use crate::params::SectorSpec;

#[derive(Debug, Clone, Serialize)]
pub struct SemigroupReport {
    /// Smallest C with ‖U‖ + t(‖∂_tU‖ + ‖U‖_D) ≤ C e^{γ0 t}‖U0‖ at every sample.
    pub c_measured: f64,
    pub gamma0_used: f64,
    pub times: Vec<f64>,
    pub ratios: Vec<f64>,
}

/// Propagates U0 along contours tuned to each time and measures the
/// constant of the semigroup estimate; ∂_tU = A·U(t).
pub fn semigroup_estimate_check(
    gen: &DMatrix<Complex64>,
    u0: &[Complex64],
    times: &[f64],
    gamma0: f64,
    sector: &SectorSpec,
    nodes: usize,
    x_norm: &dyn Fn(&[Complex64]) -> Result<f64>,
    domain_norm: &dyn Fn(&[Complex64]) -> Result<f64>,
) -> Result<SemigroupReport> {
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(LabError::InvalidParameter("times must be positive".into()));
    }
    if !(gamma0 >= 0.0) {
        return Err(LabError::InvalidParameter("gamma0 must be >= 0".into()));
    }
    let n0 = x_norm(u0)?;
    let mut ratios = Vec::with_capacity(times.len());
    for &t in times {
        if n0 == 0.0 {
            ratios.push(0.0);
            continue;
        }
        let contour = ContourSpec::hyperbolic(t, nodes, sector)?;
        let u = propagate_contour(gen, u0, t, &contour)?;
        let du: Vec<Complex64> = (0..u.len()).map(|i| (0..u.len()).map(|j| gen[(i, j)] * u[j]).sum()).collect();
        let lhs = x_norm(&u)? + t * (x_norm(&du)? + domain_norm(&u)?);
        ratios.push(lhs / ((gamma0 * t).exp() * n0));
    }
    let c_measured = ratios.iter().fold(0.0, |a: f64, &b| a.max(b));
    Ok(SemigroupReport { c_measured, gamma0_used: gamma0, times: times.to_vec(), ratios })
}
