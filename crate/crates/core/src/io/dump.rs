use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{LabError, Result};
use crate::grid::{BoundaryField, Domain, HalfSpaceField};

/// Sidecar describing a `.bin` dump: interleaved little-endian f64 pairs
/// (re, im) in row-major order of `shape`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DumpMeta {
    pub name: String,
    pub dtype: String,
    pub shape: Vec<usize>,
    /// Axis names, slowest first.
    pub axes: Vec<String>,
    pub domain: Domain,
    pub tangential_points: Vec<usize>,
    pub half_length: Vec<f64>,
    /// Normal collocation nodes, empty for boundary fields.
    pub normal_nodes: Vec<f64>,
}

const DTYPE: &str = "complex128-le";

fn io_err(path: &Path, e: impl std::fmt::Display) -> LabError {
    LabError::Io(format!("{}: {e}", path.display()))
}

fn write_pair(dir: &Path, meta: &DumpMeta, data: &[Complex64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 * data.len());
    for z in data {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    let bin = dir.join(format!("{}.bin", meta.name));
    std::fs::write(&bin, bytes).map_err(|e| io_err(&bin, e))?;
    let side = dir.join(format!("{}.json", meta.name));
    let text = serde_json::to_string_pretty(meta).map_err(|e| io_err(&side, e))?;
    std::fs::write(&side, text + "\n").map_err(|e| io_err(&side, e))
}

pub fn write_field(dir: &Path, name: &str, f: &HalfSpaceField) -> Result<()> {
    let meta = DumpMeta {
        name: name.into(),
        dtype: DTYPE.into(),
        shape: vec![f.tangential.mode_count(), f.nodes(), f.components],
        axes: vec!["tangential".into(), "normal".into(), "component".into()],
        domain: f.domain,
        tangential_points: f.tangential.points.clone(),
        half_length: f.tangential.half_length.clone(),
        normal_nodes: f.normal.nodes.clone(),
    };
    write_pair(dir, &meta, &f.data)
}

pub fn write_boundary(dir: &Path, name: &str, f: &BoundaryField) -> Result<()> {
    let meta = DumpMeta {
        name: name.into(),
        dtype: DTYPE.into(),
        shape: vec![f.tangential.mode_count(), f.components],
        axes: vec!["tangential".into(), "component".into()],
        domain: f.domain,
        tangential_points: f.tangential.points.clone(),
        half_length: f.tangential.half_length.clone(),
        normal_nodes: vec![],
    };
    write_pair(dir, &meta, &f.data)
}

/// Reads `name.json` and `name.bin` from `dir`.
pub fn read_dump(dir: &Path, name: &str) -> Result<(DumpMeta, Vec<Complex64>)> {
    let side = dir.join(format!("{name}.json"));
    let text = std::fs::read_to_string(&side).map_err(|e| io_err(&side, e))?;
    let meta: DumpMeta = serde_json::from_str(&text).map_err(|e| io_err(&side, e))?;
    if meta.dtype != DTYPE {
        return Err(io_err(&side, format!("unsupported dtype {}", meta.dtype)));
    }
    let bin = dir.join(format!("{name}.bin"));
    let bytes = std::fs::read(&bin).map_err(|e| io_err(&bin, e))?;
    let len: usize = meta.shape.iter().product();
    if bytes.len() != 16 * len {
        return Err(io_err(&bin, format!("expected {} bytes, found {}", 16 * len, bytes.len())));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().unwrap_or([0; 8]));
    let data = bytes.chunks_exact(16).map(|c| Complex64::new(f(&c[..8]), f(&c[8..]))).collect();
    Ok((meta, data))
}
