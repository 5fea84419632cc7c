use num_complex::Complex64;
use serde::Serialize;
use std::path::Path;

use super::{inverse_laplace_many, ContourSpec, ModeState, PerModeGenerator};
use crate::error::{LabError, Result};
use crate::params::SectorSpec;
use crate::verification::{time_norm, NormSpec};

/// Norms of one time sample, in the order of `MaxRegReport::COLUMNS`.
#[derive(Debug, Clone, Serialize)]
pub struct TimeSample {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxRegReport {
    pub lhs: f64,
    pub rhs: f64,
    /// lhs / rhs, or 0 when both vanish.
    pub ratio: f64,
    pub gamma0: f64,
    pub p: f64,
    pub q: f64,
    pub samples: Vec<TimeSample>,
}

impl MaxRegReport {
    pub const COLUMNS: [&'static str; 8] = [
        "dt_eta_H1",
        "eta_H1",
        "dt_u_L2",
        "half_grad_u_L2",
        "u_H2",
        "dt_h_trace",
        "h_trace",
        "forcing",
    ];
}

/// Forcing profile t·e^{−t}; its Laplace transform is (λ+1)⁻².
fn profile(t: f64) -> f64 {
    t * (-t).exp()
}

/// Left and right sides of the maximal-regularity estimate for one mode with
/// forcing φ(t)·(d₀, f₀, k₀), φ(t) = t·e^{−t}, zero initial data and g = 0.
///
/// Λ^{1/2} acts as multiplication by λ^{1/2} on the Laplace side. Spatial
/// norms are per-mode L₂ quantities; q enters only the trace orders of h.
pub fn maximal_regularity_norms(
    gen: &PerModeGenerator,
    forcing: &ModeState,
    sector: &SectorSpec,
    spec: &NormSpec,
    times: &[f64],
    nodes: usize,
) -> Result<MaxRegReport> {
    spec.validate()?;
    let nc = gen.components();
    let nn = gen.grid.len();
    if forcing.eta.len() != nn || forcing.u.len() != nn * nc {
        return Err(LabError::ShapeMismatch("forcing does not match the generator grid".into()));
    }
    if times.len() < 2 || times.iter().any(|&t| !(t > 0.0)) {
        return Err(LabError::InvalidParameter("need at least two positive times".into()));
    }
    let g1 = gen.params.gamma1;
    let rhs_state = ModeState {
        eta: forcing.eta.clone(),
        u: forcing.u.iter().map(|z| z / g1).collect(),
        h: forcing.h,
    };
    let b = gen.pack(&rhs_state)?;
    let s: f64 = gen.xi.iter().map(|x| x * x).sum();
    let q = spec.q;
    let tr = |order: f64, h: Complex64| (1.0 + s).powf(order / 2.0) * h.norm();

    let f_eta = gen.column_hk(&forcing.eta, 1).sqrt();
    let f_u: f64 = (0..nc)
        .map(|c| gen.column_hk(&forcing.u.iter().skip(c).step_by(nc).copied().collect::<Vec<_>>(), 0))
        .sum::<f64>()
        .sqrt();
    let f_size = f_eta + f_u + tr(2.0 - 1.0 / q, forcing.h);

    let zero = b.iter().all(|z| z.norm() == 0.0);
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        let mut values = vec![0.0; 7];
        if !zero {
            let contour = ContourSpec::hyperbolic(t, nodes, sector)?;
            let base = |z: Complex64| (z + 1.0).powi(-2);
            let g0 = move |z: Complex64| base(z);
            let g1 = move |z: Complex64| z * base(z);
            let gh = move |z: Complex64| z.sqrt() * base(z);
            let out = inverse_laplace_many(&gen.matrix, &b, t, &contour, &[&g0, &g1, &gh])?;
            let (u, du, hu) = (gen.unpack(&out[0])?, gen.unpack(&out[1])?, gen.unpack(&out[2])?);
            let col = |st: &ModeState, c: usize| -> Vec<Complex64> { st.u.iter().skip(c).step_by(nc).copied().collect() };
            let sum_cols = |st: &ModeState, k: usize| (0..nc).map(|c| gen.column_hk(&col(st, c), k)).sum::<f64>();
            values[0] = gen.column_hk(&du.eta, 1).sqrt();
            values[1] = gen.column_hk(&u.eta, 1).sqrt();
            values[2] = sum_cols(&du, 0).sqrt();
            values[3] = (sum_cols(&hu, 1) - sum_cols(&hu, 0)).max(0.0).sqrt();
            values[4] = sum_cols(&u, 2).sqrt();
            values[5] = tr(2.0 - 1.0 / q, du.h);
            values[6] = tr(3.0 - 1.0 / q, u.h);
        }
        values.push(profile(t) * f_size);
        samples.push(TimeSample { t, values });
    }
    let column = |k: usize| -> Vec<f64> { samples.iter().map(|s| s.values[k]).collect() };
    let lhs = (0..7).map(|k| time_norm(times, &column(k), spec)).sum::<Result<f64>>()?;
    let rhs = time_norm(times, &column(7), spec)?;
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(MaxRegReport { lhs, rhs, ratio, gamma0: spec.gamma, p: spec.p, q, samples })
}

/// Writes `t, column…` rows.
pub fn write_time_series_csv(path: &Path, columns: &[&str], samples: &[TimeSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| LabError::Io(e.to_string()))?;
    let mut header = vec!["t".to_string()];
    header.extend(columns.iter().map(|c| c.to_string()));
    w.write_record(&header).map_err(|e| LabError::Io(e.to_string()))?;
    for s in samples {
        let mut row = vec![format!("{:.17e}", s.t)];
        row.extend(s.values.iter().map(|v| format!("{v:.17e}")));
        w.write_record(&row).map_err(|e| LabError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
