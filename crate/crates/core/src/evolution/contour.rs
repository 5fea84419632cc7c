use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::params::{in_lambda_region, SectorSpec};

pub const DEFAULT_NODES: usize = 48;
const EPS: f64 = 1e-16;

/// Hyperbola z(u) = σ0 + μ(1 + sin(iu − α)), sampled at u_k = (k − (n−1)/2)·h.
/// Its asymptotes make the angle π/2 + α with the positive real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub alpha: f64,
    pub mu: f64,
    pub step: f64,
    pub offset: f64,
    pub nodes: usize,
}

impl ContourSpec {
    /// Nodes z_k and derivatives z′(u_k).
    pub fn points(&self) -> Vec<(Complex64, Complex64)> {
        let i = Complex64::new(0.0, 1.0);
        let mid = (self.nodes as f64 - 1.0) / 2.0;
        (0..self.nodes)
            .map(|k| {
                let u = (k as f64 - mid) * self.step;
                let w = i * u - self.alpha;
                (self.offset + self.mu * (1.0 + w.sin()), i * self.mu * w.cos())
            })
            .collect()
    }

    pub fn validate(&self, sector: &SectorSpec) -> Result<()> {
        let ok = self.nodes >= 2
            && self.alpha > 0.0
            && self.alpha <= PI / 4.0 + 1e-15
            && self.alpha < PI / 2.0 - sector.epsilon
            && self.mu > 0.0
            && self.step > 0.0
            && self.offset >= sector.lambda0;
        if !ok {
            return Err(LabError::InvalidParameter(format!("invalid contour {self:?}")));
        }
        for (z, _) in self.points() {
            if !in_lambda_region(z, sector)? {
                return Err(LabError::InvalidParameter(format!("contour node {z} lies outside the region")));
            }
        }
        Ok(())
    }

    /// Error model of the trapezoidal rule at time t: discretization toward
    /// the spectral sector, toward the vertical line, truncation, roundoff.
    /// Every term carries the factor e^{σ0 t} of the shifted contour.
    fn error_model(alpha: f64, mu: f64, h: f64, nodes: usize, t: f64, delta: f64, offset: f64) -> f64 {
        let d_up = PI / 2.0 - delta - alpha;
        let umax = (nodes as f64 - 1.0) / 2.0 * h;
        let terms = [
            -2.0 * PI * d_up / h,
            mu * t - 2.0 * PI * alpha / h,
            mu * t * (1.0 - alpha.sin() * umax.cosh()),
            EPS.ln() + mu * t * (1.0 - alpha.sin()),
        ];
        offset * t + terms.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    /// Contour for time t assuming the spectrum fills the sector |arg(−z)| ≤ ε.
    pub fn hyperbolic(t: f64, nodes: usize, sector: &SectorSpec) -> Result<Self> {
        Self::hyperbolic_with_angle(t, nodes, sector, sector.epsilon)
    }

    /// Grid search over (α, μ, h) for time t with the spectrum in
    /// |arg(−z)| ≤ δ, δ ≤ ε, keeping only contours whose nodes all lie in Λ_{ε,λ0}.
    pub fn hyperbolic_with_angle(t: f64, nodes: usize, sector: &SectorSpec, delta: f64) -> Result<Self> {
        sector.validate()?;
        if !(t > 0.0 && t.is_finite()) || nodes < 2 {
            return Err(LabError::InvalidParameter("contour needs t > 0 and at least 2 nodes".into()));
        }
        if !(0.0..=sector.epsilon).contains(&delta) {
            return Err(LabError::InvalidParameter("spectral angle must lie in [0, epsilon]".into()));
        }
        let amax = (PI / 4.0).min(PI / 2.0 - sector.epsilon);
        let mut cands = vec![];
        for ia in 1..=24 {
            let alpha = amax * ia as f64 / 25.0;
            for ih in 0..60 {
                let h = 10f64.powf(-3.0 + 3.0 * ih as f64 / 59.0);
                for im in 0..60 {
                    let mu = 10f64.powf(-1.0 + 4.0 * im as f64 / 59.0) * nodes as f64 / t / 10.0;
                    cands.push((Self::error_model(alpha, mu, h, nodes, t, delta, sector.lambda0), alpha, mu, h));
                }
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, alpha, mu, step) in cands {
            let c = ContourSpec { alpha, mu, step, offset: sector.lambda0, nodes };
            if c.validate(sector).is_ok() {
                return Ok(c);
            }
        }
        Err(LabError::SearchFailed("no admissible contour found".into()))
    }
}

/// (2πi)⁻¹ ∫ e^{zt} g(z) (z − A)⁻¹ b dz by the trapezoidal rule.
pub fn inverse_laplace(
    gen: &DMatrix<Complex64>,
    b: &[Complex64],
    t: f64,
    contour: &ContourSpec,
    g: &(dyn Fn(Complex64) -> Complex64 + Sync),
) -> Result<Vec<Complex64>> {
    Ok(inverse_laplace_many(gen, b, t, contour, &[g])?.remove(0))
}

/// Several multipliers g sharing the resolvent solves.
pub fn inverse_laplace_many(
    gen: &DMatrix<Complex64>,
    b: &[Complex64],
    t: f64,
    contour: &ContourSpec,
    gs: &[&(dyn Fn(Complex64) -> Complex64 + Sync)],
) -> Result<Vec<Vec<Complex64>>> {
    let n = gen.nrows();
    if gen.ncols() != n || b.len() != n {
        return Err(LabError::ShapeMismatch("generator must be square and match the state".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(LabError::InvalidParameter("t must be positive".into()));
    }
    let rhs = DVector::from_column_slice(b);
    let scale = contour.step / (2.0 * PI);
    let parts: Vec<Vec<DVector<Complex64>>> = contour
        .points()
        .into_par_iter()
        .map(|(z, dz)| {
            let mut m = -gen.clone();
            for k in 0..n {
                m[(k, k)] += z;
            }
            let x = m
                .lu()
                .solve(&rhs)
                .filter(|x| x.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
                .ok_or_else(|| LabError::SingularSystem(format!("resolvent solve failed at contour node {z}")))?;
            // dz/(2πi) with the 1/i folded in
            let w = (z * t).exp() * dz * Complex64::new(0.0, -scale);
            Ok(gs.iter().map(|g| &x * (w * g(z))).collect())
        })
        .collect::<Result<_>>()?;
    let mut out = vec![DVector::<Complex64>::zeros(n); gs.len()];
    for p in parts {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    Ok(out.into_iter().map(|v| v.iter().copied().collect()).collect())
}

/// U(t) = e^{tA}U0 through the resolvent along the contour.
pub fn propagate_contour(gen: &DMatrix<Complex64>, u0: &[Complex64], t: f64, contour: &ContourSpec) -> Result<Vec<Complex64>> {
    inverse_laplace(gen, u0, t, contour, &|_| Complex64::new(1.0, 0.0))
}
