//! Physical constants, their reduced form, and the complex-plane regions
//! on which the resolvent is posed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{LabError, Result};

/// Absolute tolerance for region boundary tests. Boundaries count as inside.
pub const REGION_TOL: f64 = 1e-12;

/// Physical constants of the linearized model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluidParams {
    pub mu: f64,
    pub nu: f64,
    pub sigma: f64,
    pub m: f64,
    pub gamma1: f64,
    pub gamma3: f64,
    pub zeta: Complex64,
    pub zeta0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

impl Default for FluidParams {
    fn default() -> Self {
        Self::baseline()
    }
}

impl FluidParams {
    /// μ = ν = σ = m = γ₁ = γ₃ = 1, ζ = 0.
    pub fn baseline() -> Self {
        FluidParams {
            mu: 1.0,
            nu: 1.0,
            sigma: 1.0,
            m: 1.0,
            gamma1: 1.0,
            gamma3: 1.0,
            zeta: Complex64::new(0.0, 0.0),
            zeta0: 1.0,
            rho1: 1.0,
            rho2: 1.0,
            rho3: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mu, self.nu, self.sigma, self.m, self.gamma1, self.gamma3, self.zeta0, self.rho1,
            self.rho2, self.rho3, self.zeta.re, self.zeta.im,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidParameter("non-finite fluid parameter".into()));
        }
        let bad = |msg: &str| Err(LabError::InvalidParameter(msg.to_string()));
        if self.mu <= 0.0 || self.nu <= 0.0 {
            return bad("mu and nu must be positive");
        }
        if self.m <= 0.0 {
            return bad("m must be positive");
        }
        if self.sigma < 0.0 {
            return bad("sigma must be non-negative");
        }
        if self.rho1 <= 0.0 || self.rho2 <= 0.0 || self.rho3 <= 0.0 || self.zeta0 <= 0.0 {
            return bad("rho1, rho2, rho3, zeta0 must be positive");
        }
        if !(self.rho1 <= self.gamma1 && self.gamma1 <= self.rho2) {
            return bad("need rho1 <= gamma1 <= rho2");
        }
        if !(self.gamma3 > 0.0 && self.gamma3 <= self.rho3) {
            return bad("need 0 < gamma3 <= rho3");
        }
        if self.zeta.norm() > self.zeta0 + REGION_TOL {
            return bad("need |zeta| <= zeta0");
        }
        Ok(())
    }

    /// Ratio ρ₃/ν used for the excluded disk of Λ.
    pub fn rho3_over_nu(&self) -> f64 {
        self.rho3 / self.nu
    }
}

/// Reduced constants α, β, ζ′, σ′.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub alpha: f64,
    pub beta: f64,
    pub zeta_prime: Complex64,
    pub sigma_prime: f64,
}

pub fn reduce_params(p: &FluidParams) -> ReducedParams {
    ReducedParams {
        alpha: p.mu / p.gamma1,
        beta: (p.nu - p.mu) / p.gamma1,
        zeta_prime: p.zeta * (p.gamma3 / p.gamma1),
        sigma_prime: p.sigma / p.gamma1,
    }
}

/// Which admissible set of ζ is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ZetaCase {
    /// ζ = λ⁻¹, the case produced by eliminating the density.
    C1,
    /// ζ ∈ Σ_ε with Re ζ < 0.
    C2,
    /// Re ζ ≥ 0.
    C3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSpec {
    pub epsilon: f64,
    pub lambda0: f64,
    pub zeta_case: ZetaCase,
    /// ρ₃/ν, fixes the disk removed from Σ_{ε,λ0} to form Λ.
    pub nu_over_rho: f64,
}

impl SectorSpec {
    pub fn new(epsilon: f64, lambda0: f64, zeta_case: ZetaCase, nu_over_rho: f64) -> Result<Self> {
        let s = SectorSpec { epsilon, lambda0, zeta_case, nu_over_rho };
        s.validate()?;
        Ok(s)
    }

    /// ε = π/4, λ0 = 1, case C3, ρ₃/ν = 1.
    pub fn baseline() -> Self {
        SectorSpec { epsilon: PI / 4.0, lambda0: 1.0, zeta_case: ZetaCase::C3, nu_over_rho: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        if !(self.lambda0 >= 0.0) || !self.lambda0.is_finite() {
            return Err(LabError::InvalidParameter("lambda0 must be >= 0".into()));
        }
        if !(self.nu_over_rho >= 0.0) || !self.nu_over_rho.is_finite() {
            return Err(LabError::InvalidParameter("nu_over_rho must be >= 0".into()));
        }
        Ok(())
    }

    pub fn with_lambda0(mut self, lambda0: f64) -> Self {
        self.lambda0 = lambda0;
        self
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < PI / 2.0 {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(format!("epsilon = {epsilon} not in (0, pi/2)")))
    }
}

/// A resolvent parameter paired with a tangential frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: Complex64,
    pub xi: Vec<f64>,
}

impl SpectralPoint {
    pub fn new(lambda: Complex64, xi: Vec<f64>) -> Self {
        SpectralPoint { lambda, xi }
    }

    pub fn tau(&self) -> f64 {
        self.lambda.im
    }

    pub fn xi_sq(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum()
    }

    pub fn xi_norm(&self) -> f64 {
        self.xi_sq().sqrt()
    }
}

/// λ ∈ Σ_{ε,λ0}.
pub fn in_sigma(lambda: Complex64, epsilon: f64, lambda0: f64) -> Result<bool> {
    check_epsilon(epsilon)?;
    Ok(in_sigma_unchecked(lambda, epsilon, lambda0))
}

pub(crate) fn in_sigma_unchecked(lambda: Complex64, epsilon: f64, lambda0: f64) -> bool {
    if lambda.re == 0.0 && lambda.im == 0.0 {
        return false;
    }
    lambda.arg().abs() <= PI - epsilon + REGION_TOL && lambda.norm() >= lambda0 - REGION_TOL
}

/// λ ∈ Λ_{ε,λ0}.
pub fn in_lambda_region(lambda: Complex64, spec: &SectorSpec) -> Result<bool> {
    spec.validate()?;
    Ok(in_lambda_unchecked(lambda, spec))
}

pub(crate) fn in_lambda_unchecked(lambda: Complex64, spec: &SectorSpec) -> bool {
    if !in_sigma_unchecked(lambda, spec.epsilon, spec.lambda0) {
        return false;
    }
    let r = spec.nu_over_rho + spec.epsilon;
    let dx = lambda.re + r;
    dx * dx + lambda.im * lambda.im >= r * r - REGION_TOL
}

/// Checks that the configured case matches the value of ζ.
pub fn check_zeta_case(spec: &SectorSpec, params: &FluidParams) -> Result<()> {
    let z = params.zeta;
    match spec.zeta_case {
        ZetaCase::C1 => Ok(()),
        ZetaCase::C2 => {
            if z.im == 0.0 {
                return Err(LabError::DegenerateCase("case C2 requires Im zeta != 0".into()));
            }
            if !(z.re < 0.0) || !in_sigma_unchecked(z, spec.epsilon, 0.0) {
                return Err(LabError::InvalidParameter(
                    "case C2 requires zeta in the sector with Re zeta < 0".into(),
                ));
            }
            Ok(())
        }
        ZetaCase::C3 => {
            if z.re >= 0.0 {
                Ok(())
            } else {
                Err(LabError::InvalidParameter("case C3 requires Re zeta >= 0".into()))
            }
        }
    }
}

/// λ ∈ Γ_{ε,λ0,ζ}.
pub fn in_gamma_region(lambda: Complex64, spec: &SectorSpec, params: &FluidParams) -> Result<bool> {
    spec.validate()?;
    check_zeta_case(spec, params)?;
    Ok(in_gamma_unchecked(lambda, spec, params.zeta))
}

pub(crate) fn in_gamma_unchecked(lambda: Complex64, spec: &SectorSpec, zeta: Complex64) -> bool {
    match spec.zeta_case {
        ZetaCase::C1 => in_lambda_unchecked(lambda, spec),
        ZetaCase::C2 => {
            let ratio = (zeta.re / zeta.im).abs();
            lambda.re >= ratio * lambda.im.abs() - REGION_TOL && lambda.re >= spec.lambda0 - REGION_TOL
        }
        ZetaCase::C3 => lambda.re >= spec.lambda0 - REGION_TOL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorInequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// |aλ + |ξ′|²| against sin(ε/2)(a|λ| + |ξ′|²).
pub fn sector_inequality_check(
    sample: &SpectralPoint,
    a: f64,
    epsilon: f64,
) -> Result<SectorInequalityReport> {
    if !in_sigma(sample.lambda, epsilon, 0.0)? {
        return Err(LabError::OutsideRegion { re: sample.lambda.re, im: sample.lambda.im });
    }
    if !(a > 0.0) {
        return Err(LabError::InvalidParameter("a must be positive".into()));
    }
    let s = sample.xi_sq();
    let lhs = (sample.lambda * a + s).norm();
    let rhs = (epsilon / 2.0).sin() * (a * sample.lambda.norm() + s);
    Ok(SectorInequalityReport { lhs, rhs, holds: lhs >= rhs * (1.0 - 1e-14) })
}

/// Coefficients of the reduced per-mode problem at a fixed λ.
///
/// `zeta` is the reduced ζ′; under case C1 it is γ₃/(γ₁λ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub lambda: Complex64,
    pub alpha: f64,
    pub beta: f64,
    pub zeta: Complex64,
    pub sigma: f64,
    pub m: f64,
}

/// Parameters together with the region in which λ must lie.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub fluid: FluidParams,
    pub sector: SectorSpec,
}

impl Model {
    pub fn new(fluid: FluidParams, sector: SectorSpec) -> Result<Self> {
        fluid.validate()?;
        sector.validate()?;
        check_zeta_case(&sector, &fluid)?;
        Ok(Model { fluid, sector })
    }

    pub fn baseline() -> Self {
        Model { fluid: FluidParams::baseline(), sector: SectorSpec::baseline() }
    }

    pub fn reduced(&self) -> ReducedParams {
        reduce_params(&self.fluid)
    }

    pub fn contains(&self, lambda: Complex64) -> bool {
        in_gamma_unchecked(lambda, &self.sector, self.fluid.zeta)
    }

    /// Coefficients at λ without a region check.
    pub fn coefficients_unchecked(&self, lambda: Complex64) -> Coefficients {
        let r = self.reduced();
        let zeta = match self.sector.zeta_case {
            ZetaCase::C1 => Complex64::new(self.fluid.gamma3 / self.fluid.gamma1, 0.0) / lambda,
            _ => r.zeta_prime,
        };
        Coefficients { lambda, alpha: r.alpha, beta: r.beta, zeta, sigma: r.sigma_prime, m: self.fluid.m }
    }

    /// Coefficients at λ, rejecting λ outside Γ_{ε,λ0,ζ}.
    pub fn coefficients(&self, lambda: Complex64) -> Result<Coefficients> {
        if !lambda.re.is_finite() || !lambda.im.is_finite() || !self.contains(lambda) {
            return Err(LabError::OutsideRegion { re: lambda.re, im: lambda.im });
        }
        Ok(self.coefficients_unchecked(lambda))
    }
}
