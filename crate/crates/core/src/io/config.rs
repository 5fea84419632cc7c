use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{LabError, Result};
use crate::grid::{NormalGrid, TangentialGrid};
use crate::params::{FluidParams, Model, SectorSpec};

/// Parsed run configuration. See `configs/baseline.toml` for an annotated example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// Output directory; not part of the config hash.
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub fluid: FluidParams,
    pub sector: Option<SectorSpec>,
    #[serde(default)]
    pub grid: GridConfig,
    pub solve: Option<SolveConfig>,
    pub scan: Option<ScanConfig>,
    pub contour: Option<ContourConfig>,
    pub bent: Option<BentConfig>,
    pub rbound: Option<RBoundConfig>,
    /// Verdict tolerances by key, merged over the defaults.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub tangential_points: usize,
    pub half_length: f64,
    pub normal_nodes: usize,
    /// Truncation length; derived from the model when absent.
    pub x_max: Option<f64>,
    /// Scale of the algebraic map; max(2, X/10) when absent.
    pub ell: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { tangential_points: 64, half_length: 8.0, normal_nodes: 64, x_max: None, ell: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Zero,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub lambda: Complex64,
    pub data: DataKind,
    /// Write u, η, h as binary dumps.
    pub dump: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { lambda: Complex64::new(4.0, 0.0), data: DataKind::Gaussian, dump: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub samples: usize,
    pub identity_samples: usize,
    pub multiplier_samples: usize,
    pub max_deriv_order: usize,
    pub lambda_span: f64,
    pub xi_min: f64,
    pub xi_max: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            samples: 100_000,
            identity_samples: 10_000,
            multiplier_samples: 2_000,
            max_deriv_order: 2,
            lambda_span: 1e4,
            xi_min: 1e-3,
            xi_max: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourConfig {
    pub nodes: usize,
    pub times: Vec<f64>,
    /// Tangential frequency of the per-mode generator.
    pub xi: f64,
    /// Normal nodes of the generator grid; the state has 3n − 3 entries.
    pub generator_nodes: usize,
    /// Sector vertex used for the contour; the per-mode spectrum sits inside
    /// Λ_{ε,λ0} only for λ0 ≳ 3.33.
    pub lambda0: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig { nodes: 96, times: vec![0.1, 0.5, 1.0, 2.0], xi: 2.0, generator_nodes: 48, lambda0: 3.33 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BentConfig {
    pub amplitude: f64,
    pub width: f64,
    pub lambda: Complex64,
    pub max_iter: usize,
    pub tol: f64,
    pub probes: usize,
    pub power_steps: usize,
}

impl Default for BentConfig {
    fn default() -> Self {
        BentConfig {
            amplitude: 0.05,
            width: 1.0,
            lambda: Complex64::new(16.0, 0.0),
            max_iter: 50,
            tol: 1e-12,
            probes: 8,
            power_steps: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RBoundConfig {
    pub q: f64,
    pub trials: usize,
    pub test_vectors: usize,
    /// Number of sampled λ in the resolvent family.
    pub lambdas: usize,
    /// Family λ^{power}·𝒜(λ).
    pub power: f64,
    pub tangential_points: usize,
    pub normal_nodes: usize,
}

impl Default for RBoundConfig {
    fn default() -> Self {
        RBoundConfig { q: 2.0, trials: 100, test_vectors: 4, lambdas: 8, power: 0.5, tangential_points: 8, normal_nodes: 16 }
    }
}

/// Default verdict tolerances.
pub const DEFAULT_TOLERANCES: [(&str, f64); 15] = [
    ("solve.residual", 1e-6),
    ("solve.kinematic", 1e-10),
    ("symbols.form_identity", 1e-12),
    ("symbols.taylor", 1e-6),
    ("symbols.refinement_growth", 0.05),
    ("nab.lambda0_max", 100.0),
    ("nab.c_min", 1e-6),
    ("rbound.singleton", 1e-12),
    ("rbound.scalar", 1e-9),
    ("evolve.contour", 1e-6),
    ("evolve.composition", 1e-6),
    ("evolve.scalar", 1e-8),
    ("bent.ratio", 0.5),
    ("bent.residual", 1e-6),
    ("bent.flat", 1e-12),
];

fn config_err(e: impl std::fmt::Display) -> LabError {
    LabError::Config(e.to_string())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(config_err)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(config_err)
    }

    /// Applies `KEY=VAL` tolerance overrides.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| config_err(format!("override `{o}` is not KEY=VAL")))?;
            let v: f64 = v.trim().parse().map_err(|_| config_err(format!("override `{o}` has a non-numeric value")))?;
            self.tolerances.insert(k.trim().to_string(), v);
        }
        Ok(())
    }

    /// Tolerance table with overrides; unknown keys are rejected.
    pub fn tolerances(&self) -> Result<BTreeMap<String, f64>> {
        let mut out: BTreeMap<String, f64> = DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in &self.tolerances {
            if !out.contains_key(k) {
                return Err(config_err(format!("unknown tolerance key `{k}`")));
            }
            if !(v.is_finite() && *v >= 0.0) {
                return Err(config_err(format!("tolerance `{k}` must be finite and >= 0")));
            }
            out.insert(k.clone(), *v);
        }
        Ok(out)
    }

    pub fn model(&self) -> Result<Model> {
        let sector = self.sector.ok_or_else(|| config_err("missing [sector] block"))?;
        Model::new(self.fluid, sector).map_err(|e| config_err(e))
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| config_err("this command is randomized and needs a seed"))
    }

    pub fn tangential(&self) -> Result<TangentialGrid> {
        TangentialGrid::line(self.grid.tangential_points, self.grid.half_length).map_err(config_err)
    }

    pub fn normal(&self, model: &Model) -> Result<NormalGrid> {
        let g = &self.grid;
        match g.x_max {
            Some(x) => NormalGrid::mapped(g.normal_nodes, x, g.ell.unwrap_or((x / 10.0).max(2.0))).map_err(config_err),
            None => NormalGrid::for_model(model, g.normal_nodes).map_err(config_err),
        }
    }

    /// SHA-256 of the canonical JSON of every field except `out`.
    pub fn hash(&self) -> Result<String> {
        let mut v = serde_json::to_value(self).map_err(config_err)?;
        if let Some(map) = v.as_object_mut() {
            map.remove("out");
        }
        // serde_json maps are ordered by key, so this text is canonical
        let text = serde_json::to_string(&v).map_err(config_err)?;
        Ok(Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
[sector]
epsilon = 0.7853981633974483
lambda0 = 1.0
zeta_case = "C3"
nu_over_rho = 1.0
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.fluid, FluidParams::baseline());
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.model().unwrap(), Model::baseline());
    }

    #[test]
    fn round_trip_through_text() {
        let mut c = RunConfig::parse(MINIMAL).unwrap();
        c.bent = Some(BentConfig::default());
        c.solve = Some(SolveConfig::default());
        let back = RunConfig::parse(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash().unwrap(), c.hash().unwrap());
    }

    #[test]
    fn hash_tracks_meaningful_fields_only() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        let mut moved = c.clone();
        moved.out = Some("elsewhere".into());
        assert_eq!(moved.hash().unwrap(), c.hash().unwrap());
        let mut changed = c.clone();
        changed.fluid.mu = 2.0;
        assert_ne!(changed.hash().unwrap(), c.hash().unwrap());
        let mut tol = c.clone();
        tol.apply_overrides(&["bent.ratio=0.4".into()]).unwrap();
        assert_ne!(tol.hash().unwrap(), c.hash().unwrap());
    }

    #[test]
    fn bad_inputs_are_config_errors() {
        assert!(matches!(RunConfig::parse("seed = 1\n[fluid]\nmu = 1.0\nbogus = 2\n"), Err(LabError::Config(_))));
        let c = RunConfig::parse("seed = 1\n").unwrap();
        assert!(matches!(c.model(), Err(LabError::Config(_))));
        let mut c = RunConfig::parse(MINIMAL).unwrap();
        assert!(c.apply_overrides(&["nonsense".into()]).is_err());
        c.apply_overrides(&["no.such.key=1".into()]).unwrap();
        assert!(c.tolerances().is_err());
    }
}
