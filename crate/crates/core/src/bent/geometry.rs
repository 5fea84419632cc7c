use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::TangentialGrid;

/// Φ(ξ) = (ξ₁, ξ₂ + a·exp(−ξ₁²/w²)): a vertical shear, so 𝔸 = 𝔸₋ = I and
/// 𝔹, 𝔹₋ have a single entry ±b′(ξ₁) in position (1, 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffeoSpec {
    pub amplitude: f64,
    pub width: f64,
}

/// sup-norms of 𝔹 (= 𝔹₋ up to sign) and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffeoBounds {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

impl DiffeoSpec {
    pub fn identity() -> Self {
        DiffeoSpec { amplitude: 0.0, width: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.width.is_finite() && self.width > 0.0) {
            return Err(LabError::InvalidParameter("bump needs a finite amplitude and a positive width".into()));
        }
        let m1 = self.bounds().m1;
        if m1 >= 1.0 {
            return Err(LabError::InvalidParameter(format!("bump too steep: M1 = {m1} >= 1")));
        }
        Ok(())
    }

    /// b(s), b′(s), b″(s), b‴(s).
    pub fn bump(&self, s: f64) -> [f64; 4] {
        let w2 = self.width * self.width;
        let e = self.amplitude * (-s * s / w2).exp();
        let d1 = -2.0 * s / w2 * e;
        let d2 = (4.0 * s * s / (w2 * w2) - 2.0 / w2) * e;
        let d3 = (12.0 * s / (w2 * w2) - 8.0 * s * s * s / (w2 * w2 * w2)) * e;
        [e, d1, d2, d3]
    }

    pub fn phi(&self, xi: [f64; 2]) -> [f64; 2] {
        [xi[0], xi[1] + self.bump(xi[0])[0]]
    }

    pub fn phi_inv(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0], x[1] - self.bump(x[0])[0]]
    }

    /// ∇Φᵀ = 𝔸 + 𝔹 with entries ∂_iΦ_j.
    pub fn grad_phi_t(&self, xi1: f64) -> [[f64; 2]; 2] {
        [[1.0, self.bump(xi1)[1]], [0.0, 1.0]]
    }

    /// 𝒜_Φ = ∇_x(Φ⁻¹)ᵀ at Φ(ξ) = 𝔸₋ + 𝔹₋.
    pub fn a_phi(&self, xi1: f64) -> [[f64; 2]; 2] {
        [[1.0, -self.bump(xi1)[1]], [0.0, 1.0]]
    }

    /// |b′| peaks at s = ±w/√2 with value |a|√2 e^{−1/2}/w; b″ and b‴ are
    /// maximized numerically on a fine sample.
    pub fn bounds(&self) -> DiffeoBounds {
        let m1 = self.amplitude.abs() * 2f64.sqrt() * (-0.5f64).exp() / self.width;
        let mut m2: f64 = 0.0;
        let mut m3: f64 = 0.0;
        let n = 4001;
        for k in 0..n {
            let s = self.width * (-6.0 + 12.0 * k as f64 / (n - 1) as f64);
            let b = self.bump(s);
            m2 = m2.max(b[2].abs());
            m3 = m3.max(b[3].abs());
        }
        DiffeoBounds { m1, m2, m3 }
    }
}

/// Geometry of Γ₊ = Φ(ℝ²₀) on the tangential grid. With N = 2 every tensor
/// on the surface is 1×1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceGeometry {
    pub xi: Vec<f64>,
    /// b′, b″ at the grid points.
    pub slope: Vec<f64>,
    pub curvature: Vec<f64>,
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
    /// 𝔤₊ = det 𝔾₊.
    pub det: Vec<f64>,
    /// Λ¹₁₁.
    pub christoffel: Vec<f64>,
    /// n₊ = 𝒜_Φn₀/|𝒜_Φn₀|.
    pub normal: Vec<[f64; 2]>,
    /// |𝒜_Φn₀|.
    pub a_n0: Vec<f64>,
}

pub fn build_geometry(spec: &DiffeoSpec, tg: &TangentialGrid) -> Result<SurfaceGeometry> {
    spec.validate()?;
    if tg.dims() != 1 {
        return Err(LabError::InvalidParameter("the bent half space is implemented for N = 2 only".into()));
    }
    let xi: Vec<f64> = (0..tg.mode_count()).map(|m| tg.coords(m)[0]).collect();
    let mut geo = SurfaceGeometry {
        xi: xi.clone(),
        slope: vec![],
        curvature: vec![],
        g: vec![],
        g_inv: vec![],
        det: vec![],
        christoffel: vec![],
        normal: vec![],
        a_n0: vec![],
    };
    for &s in &xi {
        let b = spec.bump(s);
        // τ₁ = (1, b′), τ₁₁ = (0, b″)
        let g = 1.0 + b[1] * b[1];
        let gi = 1.0 / g;
        let a = spec.a_phi(s);
        // 𝒜_Φ n₀ with n₀ = (0, −1)
        let an = [-a[0][1], -a[1][1]];
        let len = (an[0] * an[0] + an[1] * an[1]).sqrt();
        geo.slope.push(b[1]);
        geo.curvature.push(b[2]);
        geo.g.push(g);
        geo.g_inv.push(gi);
        geo.det.push(g);
        geo.christoffel.push(gi * b[2] * b[1]);
        geo.normal.push([an[0] / len, an[1] / len]);
        geo.a_n0.push(len);
    }
    Ok(geo)
}
