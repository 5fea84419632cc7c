//! Closed-form Fourier symbols of the half-space problem.
//!
//! Every symbol is a function of (λ, ξ′) through the coefficients of
//! [`Coefficients`]; `|ξ′|²` is written `s` throughout.

mod scan;

pub use scan::*;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::params::{Coefficients, Model, SpectralPoint};

/// Relative threshold on |AB − |ξ′|²| below which the Lopatinski entries are refused.
pub const D0_REL_FLOOR: f64 = 1e-14;
/// Relative floor on |N| against (|λ|+|ξ′|)(|λ|^{1/2}+|ξ′|)².
pub const NAB_FLOOR: f64 = 1e-10;
/// |B − A| below this multiple of |A|+|B| switches M to its Taylor form.
pub const M_TAYLOR_SWITCH: f64 = 1e-6;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// A, B and the coefficient η = α⁻¹(α+β+ζ), stored as `eta_coef`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoreSymbols {
    pub a: Complex64,
    pub b: Complex64,
    pub eta_coef: Complex64,
    pub lambda: Complex64,
    pub xi_sq: f64,
}

impl CoreSymbols {
    /// Evaluates A and B without any region check beyond the branch test.
    pub fn compute(k: &Coefficients, xi_sq: f64) -> Result<Self> {
        let c2 = 2.0 * k.alpha + k.beta + k.zeta;
        let a = (k.lambda / c2 + xi_sq).sqrt();
        let b = (k.lambda / k.alpha + xi_sq).sqrt();
        if !(a.re > 0.0) || !(b.re > 0.0) {
            return Err(LabError::Branch(format!("Re A = {:e}, Re B = {:e}", a.re, b.re)));
        }
        Ok(CoreSymbols {
            a,
            b,
            eta_coef: (k.alpha + k.beta + k.zeta) / k.alpha,
            lambda: k.lambda,
            xi_sq,
        })
    }
}

/// A, B, η at a point of the configured Γ region.
pub fn eval_core(point: &SpectralPoint, model: &Model) -> Result<CoreSymbols> {
    let k = model.coefficients(point.lambda)?;
    CoreSymbols::compute(&k, point.xi_sq())
}

/// M(x) = (e^{−Bx} − e^{−Ax})/(B − A), continuous across B = A.
pub fn eval_m(core: &CoreSymbols, x: f64) -> Complex64 {
    m_value(core.a, core.b, x)
}

pub fn m_value(a: Complex64, b: Complex64, x: f64) -> Complex64 {
    let d = b - a;
    if d.norm() < M_TAYLOR_SWITCH * (a.norm() + b.norm()) {
        m_taylor(a, b, x)
    } else {
        ((-b * x).exp() - (-a * x).exp()) / d
    }
}

/// Three-term expansion of M around B = A; the limit is −x e^{−Ax}.
pub fn m_taylor(a: Complex64, b: Complex64, x: f64) -> Complex64 {
    let dx = (b - a) * x;
    -(-a * x).exp() * x * (ONE - dx / 2.0 + dx * dx / 6.0)
}

/// Lopatinski entries in the direct form together with the P-form values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LopatinskiMatrix {
    pub l11: Complex64,
    pub l12: Complex64,
    pub l21: Complex64,
    pub l22: Complex64,
    pub det_l: Complex64,
    pub p: Complex64,
    pub d: Complex64,
    pub n: Complex64,
    pub n_tilde: Complex64,
    pub e: Complex64,
    /// Entries recomputed through P = λ/(AB − |ξ′|²).
    pub p_form: [Complex64; 4],
    /// Largest relative gap between the two forms.
    pub form_gap: f64,
}

/// Everything the solvers need at one (λ, ξ′).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSymbols {
    pub core: CoreSymbols,
    pub lop: LopatinskiMatrix,
    pub q: Complex64,
    pub q_prime: Complex64,
    pub sigma: f64,
    pub m: f64,
    pub alpha: f64,
    pub beta: f64,
    pub zeta: Complex64,
}

fn rel_gap(x: Complex64, y: Complex64) -> f64 {
    let scale = x.norm().max(y.norm());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).norm() / scale
    }
}

impl ModeSymbols {
    pub fn compute(k: &Coefficients, xi_sq: f64) -> Result<Self> {
        let core = CoreSymbols::compute(k, xi_sq)?;
        let (a, b, s, lam) = (core.a, core.b, xi_sq, k.lambda);
        let alpha = k.alpha;
        let bz = k.beta + k.zeta;
        let c2 = 2.0 * alpha + bz;
        let ab = a * b;
        // B² − s, A² − s, B − A and AB − s written without cancellation
        let b2s = lam / alpha;
        let a2s = lam / c2;
        let b_minus_a = (b2s - a2s) / (a + b);
        let d0 = (a2s * b2s + s * (a2s + b2s)) / (ab + s);
        if d0.norm() < D0_REL_FLOOR * (ab.norm() + s) {
            return Err(LabError::NearSingular(format!("|AB - |xi|^2| = {:e}", d0.norm())));
        }
        let l11 = alpha * a * b2s / d0;
        let l12 = alpha * s * (2.0 * d0 - b2s) / d0;
        let l21 = (2.0 * alpha * a * b_minus_a - bz * a2s) / d0;
        let l22 = c2 * b * a2s / d0;
        let det_l = l11 * l22 - l12 * l21;

        let c3 = 3.0 * alpha + bz;
        let p = alpha * c2 / c3 * (ab + s) / (lam / c3 + s);
        let bracket = (a - bz / c2 * b) / (a + b);
        let p11 = a * p;
        let p12 = s * (2.0 * alpha - p);
        let p21 = bracket * p;
        let p22 = b * p;
        let d = ab * p - s * (2.0 * alpha - p) * bracket;
        let sm = k.sigma * (k.m + s);
        let n = lam * det_l + sm * l11;
        let n_tilde = lam * d + sm * a;
        let e = lam * l22 + sm;
        let form_gap = [
            rel_gap(l11, p11),
            rel_gap(l12, p12),
            rel_gap(l21, p21),
            rel_gap(l22, p22),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        let lop = LopatinskiMatrix {
            l11,
            l12,
            l21,
            l22,
            det_l,
            p,
            d,
            n,
            n_tilde,
            e,
            p_form: [p11, p12, p21, p22],
            form_gap,
        };
        Ok(ModeSymbols {
            core,
            lop,
            q: -a2s / d0,
            q_prime: ONE / (ab + s),
            sigma: k.sigma,
            m: k.m,
            alpha,
            beta: k.beta,
            zeta: k.zeta,
        })
    }

    /// Weight (|λ|+|ξ′|)(|λ|^{1/2}+|ξ′|)² of the lower bound for N.
    pub fn nab_weight(&self) -> f64 {
        nab_weight(self.core.lambda, self.core.xi_sq.sqrt())
    }

    /// Rejects |N| below the relative floor.
    pub fn check_n(&self) -> Result<()> {
        let w = self.nab_weight();
        if !(self.lop.n.norm() > NAB_FLOOR * w) {
            return Err(LabError::NearSingular(format!(
                "|N| = {:e} below floor {:e}",
                self.lop.n.norm(),
                NAB_FLOOR * w
            )));
        }
        Ok(())
    }

    /// (n_{j1}/(iξ_j), n_{j2}/(iξ_j), n_{N1}, n_{N2}); the iξ_j factor is applied by the caller.
    pub fn n_factors(&self) -> [Complex64; 4] {
        let (a, b) = (self.core.a, self.core.b);
        let l = &self.lop;
        let g = (l.l12 + b * l.l11) / (b * (a + b) * l.n) * self.q;
        let sig_eta = self.sigma * self.core.eta_coef;
        [-sig_eta * g, self.sigma * l.l11 / (b * l.n), sig_eta * a * g, self.sigma * l.l11 / l.n]
    }

    pub fn h_factor(&self) -> Complex64 {
        self.lop.det_l / self.lop.n
    }
}

pub fn nab_weight(lambda: Complex64, xi: f64) -> f64 {
    let r = lambda.norm();
    (r + xi) * (r.sqrt() + xi).powi(2)
}

pub fn eval_lopatinski(point: &SpectralPoint, model: &Model) -> Result<LopatinskiMatrix> {
    let k = model.coefficients(point.lambda)?;
    Ok(ModeSymbols::compute(&k, point.xi_sq())?.lop)
}

/// The 2N multipliers n_{Jk}. Index j < N−1 are tangential, the last pair is normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NJk {
    pub tangential: Vec<[Complex64; 2]>,
    pub normal: [Complex64; 2],
}

pub fn eval_njk(point: &SpectralPoint, model: &Model) -> Result<NJk> {
    let k = model.coefficients(point.lambda)?;
    let ms = ModeSymbols::compute(&k, point.xi_sq())?;
    ms.check_n()?;
    Ok(njk_from(&ms, &point.xi))
}

pub fn njk_from(ms: &ModeSymbols, xi: &[f64]) -> NJk {
    let f = ms.n_factors();
    let tangential = xi
        .iter()
        .map(|&x| {
            let ix = Complex64::new(0.0, x);
            [ix * f[0], ix * f[1]]
        })
        .collect();
    NJk { tangential, normal: [f[2], f[3]] }
}

pub fn eval_qqprime(point: &SpectralPoint, model: &Model) -> Result<(Complex64, Complex64)> {
    let k = model.coefficients(point.lambda)?;
    let ms = ModeSymbols::compute(&k, point.xi_sq())?;
    Ok((ms.q, ms.q_prime))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{FluidParams, SectorSpec, ZetaCase};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(re: f64, im: f64, xi: f64) -> SpectralPoint {
        SpectralPoint::new(c(re, im), vec![xi])
    }

    fn close(x: Complex64, y: Complex64, tol: f64) -> bool {
        (x - y).norm() <= tol * y.norm().max(1.0)
    }

    #[test]
    fn baseline_core() {
        let m = Model::baseline();
        let core = eval_core(&pt(1.0, 0.0, 0.0), &m).unwrap();
        assert!(close(core.a, c(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(close(core.b, c(1.0, 0.0), 1e-15));
        assert!(close(core.eta_coef, c(1.0, 0.0), 1e-15));
        assert!(matches!(
            eval_core(&pt(1e-4, 0.0, 0.0), &m),
            Err(LabError::OutsideRegion { .. })
        ));
        let core = eval_core(&pt(0.0, 1.0, 1.0), &Model {
            sector: SectorSpec::new(PI / 4.0, 1.0, ZetaCase::C1, 1.0).unwrap(),
            ..Model::baseline()
        })
        .unwrap();
        assert!(close(core.b, c(1.0, 1.0).sqrt(), 1e-15));
        assert!(core.b.re > 0.0);
    }

    #[test]
    fn m_values() {
        let core = eval_core(&pt(1.0, 0.0, 0.0), &Model::baseline()).unwrap();
        assert_eq!(eval_m(&core, 0.0), c(0.0, 0.0));
        let want = ((-1f64).exp() - (-FRAC_1_SQRT_2).exp()) / (1.0 - FRAC_1_SQRT_2);
        assert!(close(eval_m(&core, 1.0), c(want, 0.0), 1e-14));
        assert!((want + 0.42743).abs() < 1e-5);
        let one = c(1.0, 0.0);
        assert!(close(m_value(one, one, 1.0), c(-(-1f64).exp(), 0.0), 1e-15));
    }

    #[test]
    fn baseline_lopatinski() {
        let l = eval_lopatinski(&pt(1.0, 0.0, 0.0), &Model::baseline()).unwrap();
        assert_eq!(l.l12, c(0.0, 0.0));
        assert!(close(l.l11, c(1.0, 0.0), 1e-14));
        assert!(close(l.l21, c(2.0 * (1.0 - FRAC_1_SQRT_2), 0.0), 1e-14));
        assert!(close(l.l22, c(SQRT_2, 0.0), 1e-14));
        assert!(close(l.det_l, c(SQRT_2, 0.0), 1e-14));
        assert!(close(l.p, c(SQRT_2, 0.0), 1e-14));
        assert!(close(l.d, c(1.0, 0.0), 1e-14));
        assert!(close(l.n, c(1.0 + SQRT_2, 0.0), 1e-14));
        assert!(close(l.n_tilde, c(1.0 + FRAC_1_SQRT_2, 0.0), 1e-14));
        assert!(close(l.n, l.p * l.n_tilde, 1e-14));
    }

    #[test]
    fn baseline_njk_and_q() {
        let n = eval_njk(&pt(1.0, 0.0, 0.0), &Model::baseline()).unwrap();
        assert_eq!(n.tangential[0], [c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(close(n.normal[1], c(1.0 / (1.0 + SQRT_2), 0.0), 1e-14));
        let a = FRAC_1_SQRT_2;
        let want = -a * a / ((a + 1.0) * (1.0 + SQRT_2));
        assert!(close(n.normal[0], c(want, 0.0), 1e-14));
        assert!((want + 0.12132).abs() < 1e-5);

        let (q, qp) = eval_qqprime(&pt(1.0, 0.0, 0.0), &Model::baseline()).unwrap();
        assert!(close(q, c(-FRAC_1_SQRT_2, 0.0), 1e-14));
        assert!(close(qp, c(SQRT_2, 0.0), 1e-14));
    }

    #[test]
    fn q_tends_to_constant_along_a_ray() {
        // |ξ′|² − A² → 0 but AB − |ξ′|² → λ(α⁻¹ + (2α+β)⁻¹)/2 as well
        let m = Model::baseline();
        let limit = -2.0 / 3.0;
        let mut last = f64::INFINITY;
        for e in 0..7 {
            let xi = 10f64.powi(e);
            let (q, _) = eval_qqprime(&pt(2.0, 1.0, xi), &m).unwrap();
            let gap = (q - c(limit, 0.0)).norm();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-10);
    }

    fn arb_point() -> impl Strategy<Value = (f64, f64, f64)> {
        (0.0f64..4.0, -1.0f64..1.0, -3.0f64..3.0)
    }

    proptest! {
        #[test]
        fn factorizations_hold((lr, fr, lx) in arb_point()) {
            let m = Model { sector: SectorSpec::new(PI / 4.0, 1.0, ZetaCase::C1, 1.0).unwrap(), ..Model::baseline() };
            let r = 10f64.powf(lr);
            let lam = Complex64::from_polar(r, fr * (PI - PI / 4.0));
            prop_assume!(m.contains(lam));
            let k = m.coefficients(lam).unwrap();
            let xi = 10f64.powf(lx);
            let ms = ModeSymbols::compute(&k, xi * xi).unwrap();
            let l = ms.lop;
            prop_assert!(l.form_gap <= 1e-12);
            prop_assert!(rel_gap(l.det_l, l.p * l.d) <= 1e-12);
            prop_assert!(rel_gap(l.n, l.p * l.n_tilde) <= 1e-12);
            prop_assert!(rel_gap(l.n, l.l11 * l.e - lam * l.l12 * l.l21) <= 1e-12);
            let c2 = 2.0 * k.alpha + k.beta + k.zeta;
            prop_assert!(rel_gap(ms.core.a * ms.core.a, lam / c2 + xi * xi) <= 1e-14);
            prop_assert!(rel_gap(ms.core.b * ms.core.b, lam / k.alpha + xi * xi) <= 1e-14);
        }

        #[test]
        fn m_branches_agree(lr in 0.0f64..3.0, x in 0.0f64..5.0) {
            let a = Complex64::new(10f64.powf(lr), 0.3);
            let b = a * (1.0 + 1e-8);
            let d = ((-b * x).exp() - (-a * x).exp()) / (b - a);
            let t = m_taylor(a, b, x);
            prop_assert!((d - t).norm() <= 1e-6 * t.norm().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn sigma_zero_is_admitted() {
        let fluid = FluidParams { sigma: 0.0, ..FluidParams::baseline() };
        let m = Model::new(fluid, SectorSpec::baseline()).unwrap();
        let l = eval_lopatinski(&pt(3.0, 0.0, 0.0), &m).unwrap();
        assert!(close(l.n, 3.0 * l.det_l, 1e-14));
    }
}
