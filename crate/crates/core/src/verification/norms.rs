use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{BoundaryField, Direction, HalfSpaceField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Exponents of an L_p-in-time, H^k_q-in-space norm with weight e^{−γt}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: f64,
    pub q: f64,
    /// Sobolev order, 0..=3.
    pub order: usize,
    pub gamma: f64,
}

impl NormSpec {
    pub fn lq(q: f64) -> Self {
        NormSpec { p: 2.0, q, order: 0, gamma: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite() && self.q > 1.0 && self.q.is_finite()) {
            return Err(LabError::InvalidParameter("p and q must lie in (1, inf)".into()));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(LabError::InvalidParameter("gamma must be finite and >= 0".into()));
        }
        if self.order > 3 {
            return Err(LabError::InvalidParameter(format!("unsupported Sobolev order {}", self.order)));
        }
        Ok(())
    }
}

/// Multi-indices of length `dim` with total order ≤ `max`.
fn multi_indices(dim: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        let mut next = vec![];
        for a in &out {
            let used: usize = a.iter().sum();
            for k in 0..=max - used {
                let mut b = a.clone();
                b.push(k);
                next.push(b);
            }
        }
        out = next;
    }
    out
}

fn lq_sum(values: &[Complex64], comps: usize, weights: impl Fn(usize) -> f64, q: f64) -> f64 {
    values
        .chunks(comps)
        .enumerate()
        .map(|(k, v)| weights(k) * v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().powf(q))
        .sum()
}

/// (Σ_{|α|≤k} ‖∂^α f‖_q^q)^{1/q}; tangential derivatives spectral, normal
/// ones by collocation, integrals by the box rule times Clenshaw–Curtis.
pub fn discrete_norm(field: &HalfSpaceField, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    field.check_finite()?;
    let spec_field = field.to_spectral()?;
    let tg = &field.tangential;
    let grid = &field.normal;
    let nn = grid.len();
    let nc = field.components;
    let cell = tg.cell_volume();
    let w = grid.weights();
    let mut total = 0.0;
    for alpha in multi_indices(tg.dims() + 1, spec.order) {
        let (tan, normal) = alpha.split_at(tg.dims());
        let mut g = spec_field.clone();
        if tan.iter().any(|&a| a > 0) {
            for m in 0..tg.mode_count() {
                let xi = tg.frequency(m);
                let f: Complex64 = xi.iter().zip(tan).map(|(&x, &a)| (I * x).powu(a as u32)).product();
                for v in &mut g.data[m * nn * nc..(m + 1) * nn * nc] {
                    *v *= f;
                }
            }
        }
        let mut g = crate::grid::transform_tangential(&g, Direction::Inverse)?;
        for _ in 0..normal[0] {
            for m in 0..tg.mode_count() {
                for c in 0..nc {
                    let col = g.column(m, c);
                    g.set_column(m, c, &grid.apply(grid.d1(), &col));
                }
            }
        }
        total += lq_sum(&g.data, nc, |k| cell * w[k % nn], spec.q);
    }
    Ok(total.powf(1.0 / spec.q))
}

/// Same norm for a field on x_N = 0.
pub fn boundary_norm(field: &BoundaryField, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    field.check_finite()?;
    let base = field.to_spectral()?;
    let tg = &field.tangential;
    let nc = field.components;
    let cell = tg.cell_volume();
    let mut total = 0.0;
    for alpha in multi_indices(tg.dims(), spec.order) {
        let mut g = base.clone();
        for m in 0..tg.mode_count() {
            let xi = tg.frequency(m);
            let f: Complex64 = xi.iter().zip(&alpha).map(|(&x, &a)| (I * x).powu(a as u32)).product();
            for v in &mut g.data[m * nc..(m + 1) * nc] {
                *v *= f;
            }
        }
        let g = crate::grid::transform_boundary(&g, Direction::Inverse)?;
        total += lq_sum(&g.data, nc, |_| cell, spec.q);
    }
    Ok(total.powf(1.0 / spec.q))
}

/// (∫ (e^{−γt}v(t))^p dt)^{1/p} by the trapezoidal rule on the given times.
pub fn time_norm(times: &[f64], values: &[f64], spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    if times.len() != values.len() || times.len() < 2 {
        return Err(LabError::ShapeMismatch("time norm needs matching series of length >= 2".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LabError::InvalidParameter("times must be strictly increasing".into()));
    }
    let f: Vec<f64> = times.iter().zip(values).map(|(&t, &v)| ((-spec.gamma * t).exp() * v.abs()).powf(spec.p)).collect();
    let s: f64 = (1..times.len()).map(|k| 0.5 * (times[k] - times[k - 1]) * (f[k] + f[k - 1])).sum();
    Ok(s.powf(1.0 / spec.p))
}
