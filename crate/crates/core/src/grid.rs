//! Tangential FFT grids, the mapped Chebyshev normal grid, and the complex
//! fields stored on them.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::params::Model;
use crate::symbols::{decay_fit, SamplePlan};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Periodic box [−L_d, L_d) per tangential dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentialGrid {
    pub points: Vec<usize>,
    pub half_length: Vec<f64>,
}

impl TangentialGrid {
    pub fn new(points: Vec<usize>, half_length: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() > 2 || points.len() != half_length.len() {
            return Err(LabError::ShapeMismatch("tangential grid needs 1 or 2 dimensions".into()));
        }
        if points.iter().any(|&n| n < 2 || !n.is_power_of_two()) {
            return Err(LabError::InvalidParameter("tangential point counts must be powers of two".into()));
        }
        if half_length.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(LabError::InvalidParameter("half lengths must be positive".into()));
        }
        Ok(TangentialGrid { points, half_length })
    }

    /// One tangential dimension with `n` points on [−L, L).
    pub fn line(n: usize, half_length: f64) -> Result<Self> {
        Self::new(vec![n], vec![half_length])
    }

    pub fn dims(&self) -> usize {
        self.points.len()
    }

    pub fn mode_count(&self) -> usize {
        self.points.iter().product()
    }

    pub fn spacing(&self, d: usize) -> f64 {
        2.0 * self.half_length[d] / self.points[d] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|d| self.spacing(d)).product()
    }

    /// Volume of the periodic box.
    pub fn box_volume(&self) -> f64 {
        self.half_length.iter().map(|l| 2.0 * l).product()
    }

    fn split(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims()];
        let mut r = idx;
        for d in (0..self.dims()).rev() {
            out[d] = r % self.points[d];
            r /= self.points[d];
        }
        out
    }

    /// Physical point of flat index `idx` (last dimension fastest).
    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.split(idx)
            .iter()
            .enumerate()
            .map(|(d, &i)| -self.half_length[d] + i as f64 * self.spacing(d))
            .collect()
    }

    /// Discrete frequency ξ′ of flat index `idx`, in FFT order.
    pub fn frequency(&self, idx: usize) -> Vec<f64> {
        self.split(idx)
            .iter()
            .enumerate()
            .map(|(d, &i)| {
                let n = self.points[d] as i64;
                let k = if (i as i64) < n / 2 { i as i64 } else { i as i64 - n };
                PI * k as f64 / self.half_length[d]
            })
            .collect()
    }

    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        (0..self.mode_count()).map(|i| self.frequency(i)).collect()
    }

    pub fn max_frequency(&self) -> f64 {
        (0..self.dims())
            .map(|d| PI * (self.points[d] / 2) as f64 / self.half_length[d])
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }
}

/// Map from the Chebyshev variable t ∈ [−1, 1] to x ∈ [0, X].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormalMap {
    /// x = ℓ(1+t)/(1 + 2ℓ/X − t), clustering nodes within ~ℓ of the wall.
    Algebraic { ell: f64 },
    /// x = X(1+t)/2.
    Linear,
}

/// Chebyshev–Gauss–Lobatto collocation on [0, X], first node 0.
#[derive(Debug, Clone)]
pub struct NormalGrid {
    pub nodes: Vec<f64>,
    pub x_max: f64,
    pub map: NormalMap,
    t: Vec<f64>,
    bary: Vec<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
    weights: Vec<f64>,
}

impl PartialEq for NormalGrid {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.x_max == other.x_max && self.map == other.map
    }
}

impl NormalGrid {
    pub fn new(n: usize, x_max: f64, map: NormalMap) -> Result<Self> {
        if n < 4 {
            return Err(LabError::InvalidParameter("normal grid needs at least 4 nodes".into()));
        }
        if !(x_max > 0.0 && x_max.is_finite()) {
            return Err(LabError::InvalidParameter("X must be positive".into()));
        }
        if let NormalMap::Algebraic { ell } = map {
            if !(ell > 0.0 && ell.is_finite()) {
                return Err(LabError::InvalidParameter("map length must be positive".into()));
            }
        }
        let nn = n - 1;
        let t: Vec<f64> = (0..n).map(|j| -(PI * j as f64 / nn as f64).cos()).collect();
        let bary: Vec<f64> = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == nn {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let mut dt = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if i != j {
                    let v = bary[j] / bary[i] / (t[i] - t[j]);
                    dt[(i, j)] = v;
                    diag -= v;
                }
            }
            dt[(i, i)] = diag;
        }
        let mut g = NormalGrid {
            nodes: vec![],
            x_max,
            map,
            t: t.clone(),
            bary,
            d1: dt.clone(),
            d2: dt.clone(),
            weights: vec![],
        };
        g.nodes = t.iter().map(|&t| g.x_of(t)).collect();
        g.nodes[0] = 0.0;
        g.nodes[nn] = x_max;
        let jac: Vec<f64> = t.iter().map(|&t| g.dx_dt(t)).collect();
        let mut d1 = dt;
        for i in 0..n {
            for j in 0..n {
                d1[(i, j)] /= jac[i];
            }
        }
        g.d2 = &d1 * &d1;
        g.d1 = d1;
        g.weights = clenshaw_curtis(n).iter().zip(&jac).map(|(w, j)| w * j).collect();
        Ok(g)
    }

    pub fn mapped(n: usize, x_max: f64, ell: f64) -> Result<Self> {
        Self::new(n, x_max, NormalMap::Algebraic { ell })
    }

    pub fn linear(n: usize, x_max: f64) -> Result<Self> {
        Self::new(n, x_max, NormalMap::Linear)
    }

    /// Truncation X = max(20, 10/Re B(λ0, 0), 12·ln10/(c′√λ0)) with the
    /// algebraic map, ℓ = max(2, X/10).
    pub fn for_model(model: &Model, n: usize) -> Result<Self> {
        let x = truncation_length(model)?;
        Self::mapped(n, x, (x / 10.0).max(2.0))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_of(&self, t: f64) -> f64 {
        match self.map {
            NormalMap::Algebraic { ell } => ell * (1.0 + t) / (1.0 + 2.0 * ell / self.x_max - t),
            NormalMap::Linear => 0.5 * self.x_max * (1.0 + t),
        }
    }

    pub fn t_of(&self, x: f64) -> f64 {
        match self.map {
            NormalMap::Algebraic { ell } => (x * (1.0 + 2.0 * ell / self.x_max) - ell) / (ell + x),
            NormalMap::Linear => 2.0 * x / self.x_max - 1.0,
        }
    }

    fn dx_dt(&self, t: f64) -> f64 {
        match self.map {
            NormalMap::Algebraic { ell } => {
                let den = 1.0 + 2.0 * ell / self.x_max - t;
                ell * (2.0 + 2.0 * ell / self.x_max) / (den * den)
            }
            NormalMap::Linear => 0.5 * self.x_max,
        }
    }

    /// First-derivative collocation matrix in x.
    pub fn d1(&self) -> &DMatrix<f64> {
        &self.d1
    }

    pub fn d2(&self) -> &DMatrix<f64> {
        &self.d2
    }

    /// Clenshaw–Curtis weights for ∫₀^X.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Barycentric interpolation row: value(x) = Σ row_j · f_j.
    pub fn interpolation_row(&self, x: f64) -> Result<Vec<f64>> {
        if !(x >= -1e-14 && x <= self.x_max * (1.0 + 1e-14)) {
            return Err(LabError::OutOfDomain(format!("x = {x} outside [0, {}]", self.x_max)));
        }
        let t = self.t_of(x.clamp(0.0, self.x_max));
        let n = self.len();
        let mut row = vec![0.0; n];
        if let Some(j) = self.t.iter().position(|&tj| (tj - t).abs() < 1e-15) {
            row[j] = 1.0;
            return Ok(row);
        }
        let mut den = 0.0;
        for j in 0..n {
            let c = self.bary[j] / (t - self.t[j]);
            row[j] = c;
            den += c;
        }
        for r in &mut row {
            *r /= den;
        }
        Ok(row)
    }

    pub fn apply(&self, m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| v[j] * m[(i, j)]).sum()).collect()
    }
}

/// Truncation length for the normal grid of a model.
pub fn truncation_length(model: &Model) -> Result<f64> {
    let k = model.coefficients_unchecked(Complex64::new(model.sector.lambda0, 0.0));
    let re_b = (k.lambda / k.alpha).sqrt().re;
    let c = decay_fit(model, &SamplePlan::new(4_000, 7))?;
    let by_fit = 12.0 * 10f64.ln() / (c * model.sector.lambda0.sqrt());
    Ok(20f64.max(10.0 / re_b).max(by_fit))
}

/// Clenshaw–Curtis weights on n Chebyshev–Lobatto points of [−1, 1].
pub fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let nn = n - 1;
    let mut w = vec![0.0; n];
    let nf = nn as f64;
    for j in 1..nn {
        let th = PI * j as f64 / nf;
        let mut v = 1.0;
        if nn % 2 == 0 {
            for k in 1..nn / 2 {
                v -= 2.0 * (2.0 * k as f64 * th).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            v -= (nf * th).cos() / (nf * nf - 1.0);
        } else {
            for k in 1..=(nn - 1) / 2 {
                v -= 2.0 * (2.0 * k as f64 * th).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
        }
        w[j] = 2.0 * v / nf;
    }
    let end = if nn % 2 == 0 { 1.0 / (nf * nf - 1.0) } else { 1.0 / (nf * nf) };
    w[0] = end;
    w[nn] = end;
    w
}

/// Gauss–Legendre nodes and weights on [−1, 1] (Golub–Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize to remove eigensolver asymmetry
    let m = pairs.clone();
    for i in 0..n {
        let k = n - 1 - i;
        pairs[i].0 = 0.5 * (m[i].0 - m[k].0);
        pairs[i].1 = 0.5 * (m[i].1 + m[k].1);
    }
    pairs.into_iter().unzip()
}

/// Whether tangential indices are grid points or Fourier modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Physical,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Values indexed (tangential index, normal node, component).
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceField {
    pub tangential: TangentialGrid,
    pub normal: Arc<NormalGrid>,
    pub components: usize,
    pub domain: Domain,
    pub data: Vec<Complex64>,
}

/// Values indexed (tangential index, component) on x_N = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    pub tangential: TangentialGrid,
    pub components: usize,
    pub domain: Domain,
    pub data: Vec<Complex64>,
}

impl HalfSpaceField {
    pub fn zeros(tangential: &TangentialGrid, normal: &Arc<NormalGrid>, components: usize, domain: Domain) -> Self {
        let len = tangential.mode_count() * normal.len() * components;
        HalfSpaceField {
            tangential: tangential.clone(),
            normal: normal.clone(),
            components,
            domain,
            data: vec![ZERO; len],
        }
    }

    /// Samples `f(x′, x_N)` at every grid point.
    pub fn from_fn(
        tangential: &TangentialGrid,
        normal: &Arc<NormalGrid>,
        components: usize,
        f: impl Fn(&[f64], f64) -> Vec<Complex64>,
    ) -> Self {
        let mut out = Self::zeros(tangential, normal, components, Domain::Physical);
        for m in 0..tangential.mode_count() {
            let xp = tangential.coords(m);
            for (i, &x) in normal.nodes.iter().enumerate() {
                let v = f(&xp, x);
                for c in 0..components {
                    let k = out.index(m, i, c);
                    out.data[k] = v[c];
                }
            }
        }
        out
    }

    /// Fills Fourier coefficients from `f(ξ′, x_N)`.
    pub fn from_spectral_fn(
        tangential: &TangentialGrid,
        normal: &Arc<NormalGrid>,
        components: usize,
        f: impl Fn(&[f64], f64) -> Vec<Complex64>,
    ) -> Self {
        let mut out = Self::zeros(tangential, normal, components, Domain::Spectral);
        for m in 0..tangential.mode_count() {
            let xi = tangential.frequency(m);
            for (i, &x) in normal.nodes.iter().enumerate() {
                let v = f(&xi, x);
                for c in 0..components {
                    let k = out.index(m, i, c);
                    out.data[k] = v[c];
                }
            }
        }
        out
    }

    pub fn nodes(&self) -> usize {
        self.normal.len()
    }

    pub fn index(&self, mode: usize, node: usize, comp: usize) -> usize {
        (mode * self.normal.len() + node) * self.components + comp
    }

    pub fn at(&self, mode: usize, node: usize, comp: usize) -> Complex64 {
        self.data[self.index(mode, node, comp)]
    }

    /// Values of one component along the normal direction for one mode.
    pub fn column(&self, mode: usize, comp: usize) -> Vec<Complex64> {
        (0..self.nodes()).map(|i| self.at(mode, i, comp)).collect()
    }

    pub fn set_column(&mut self, mode: usize, comp: usize, v: &[Complex64]) {
        for (i, x) in v.iter().enumerate() {
            let k = self.index(mode, i, comp);
            self.data[k] = *x;
        }
    }

    pub fn mode_block(&self, mode: usize) -> &[Complex64] {
        let w = self.nodes() * self.components;
        &self.data[mode * w..(mode + 1) * w]
    }

    /// Trace at x_N = 0.
    pub fn trace(&self) -> BoundaryField {
        let mut out = BoundaryField::zeros(&self.tangential, self.components, self.domain);
        for m in 0..self.tangential.mode_count() {
            for c in 0..self.components {
                out.data[m * self.components + c] = self.at(m, 0, c);
            }
        }
        out
    }

    pub fn component(&self, comp: usize) -> HalfSpaceField {
        let mut out = Self::zeros(&self.tangential, &self.normal, 1, self.domain);
        for m in 0..self.tangential.mode_count() {
            for i in 0..self.nodes() {
                out.data[m * self.nodes() + i] = self.at(m, i, comp);
            }
        }
        out
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(LabError::InvalidParameter("field contains non-finite values".into()))
        }
    }

    fn check_shape(&self) -> Result<()> {
        if self.data.len() != self.tangential.mode_count() * self.nodes() * self.components {
            return Err(LabError::ShapeMismatch(format!(
                "field has {} values, grid needs {}",
                self.data.len(),
                self.tangential.mode_count() * self.nodes() * self.components
            )));
        }
        Ok(())
    }

    pub fn compatible(&self, other: &HalfSpaceField) -> bool {
        self.tangential == other.tangential && *self.normal == *other.normal
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z *= a);
        out
    }

    /// self + a·other.
    pub fn axpy(&self, a: Complex64, other: &HalfSpaceField) -> Result<Self> {
        if !self.compatible(other) || self.components != other.components || self.domain != other.domain {
            return Err(LabError::ShapeMismatch("axpy on incompatible fields".into()));
        }
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(x, y)| *x += a * y);
        Ok(out)
    }

    pub fn to_spectral(&self) -> Result<Self> {
        match self.domain {
            Domain::Spectral => Ok(self.clone()),
            Domain::Physical => transform_tangential(self, Direction::Forward),
        }
    }

    pub fn to_physical(&self) -> Result<Self> {
        match self.domain {
            Domain::Physical => Ok(self.clone()),
            Domain::Spectral => transform_tangential(self, Direction::Inverse),
        }
    }

    /// Largest |value| over the outermost tangential grid lines, relative to the overall maximum.
    pub fn edge_ratio(&self) -> f64 {
        edge_ratio(&self.tangential, self.nodes() * self.components, &self.data)
    }
}

impl BoundaryField {
    pub fn zeros(tangential: &TangentialGrid, components: usize, domain: Domain) -> Self {
        BoundaryField {
            tangential: tangential.clone(),
            components,
            domain,
            data: vec![ZERO; tangential.mode_count() * components],
        }
    }

    pub fn from_fn(tangential: &TangentialGrid, components: usize, f: impl Fn(&[f64]) -> Vec<Complex64>) -> Self {
        let mut out = Self::zeros(tangential, components, Domain::Physical);
        for m in 0..tangential.mode_count() {
            let v = f(&tangential.coords(m));
            out.data[m * components..(m + 1) * components].copy_from_slice(&v[..components]);
        }
        out
    }

    pub fn from_spectral_fn(
        tangential: &TangentialGrid,
        components: usize,
        f: impl Fn(&[f64]) -> Vec<Complex64>,
    ) -> Self {
        let mut out = Self::zeros(tangential, components, Domain::Spectral);
        for m in 0..tangential.mode_count() {
            let v = f(&tangential.frequency(m));
            out.data[m * components..(m + 1) * components].copy_from_slice(&v[..components]);
        }
        out
    }

    pub fn at(&self, mode: usize, comp: usize) -> Complex64 {
        self.data[mode * self.components + comp]
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z *= a);
        out
    }

    pub fn axpy(&self, a: Complex64, other: &BoundaryField) -> Result<Self> {
        if self.tangential != other.tangential || self.components != other.components || self.domain != other.domain
        {
            return Err(LabError::ShapeMismatch("axpy on incompatible boundary fields".into()));
        }
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(x, y)| *x += a * y);
        Ok(out)
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(LabError::InvalidParameter("boundary field contains non-finite values".into()))
        }
    }

    pub fn to_spectral(&self) -> Result<Self> {
        match self.domain {
            Domain::Spectral => Ok(self.clone()),
            Domain::Physical => transform_boundary(self, Direction::Forward),
        }
    }

    pub fn to_physical(&self) -> Result<Self> {
        match self.domain {
            Domain::Physical => Ok(self.clone()),
            Domain::Spectral => transform_boundary(self, Direction::Inverse),
        }
    }

    pub fn edge_ratio(&self) -> f64 {
        edge_ratio(&self.tangential, self.components, &self.data)
    }
}

fn edge_ratio(grid: &TangentialGrid, stride: usize, data: &[Complex64]) -> f64 {
    let max = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let mut edge: f64 = 0.0;
    for m in 0..grid.mode_count() {
        let idx = grid.split(m);
        if idx.iter().zip(&grid.points).any(|(&i, &n)| i == 0 || i == n - 1) {
            for z in &data[m * stride..(m + 1) * stride] {
                edge = edge.max(z.norm());
            }
        }
    }
    edge / max
}

/// FFT along the tangential axes, normalized as the continuous transform
/// f̂(ξ′) = ∫ f(x′) e^{−iξ′·x′} dx′ on the periodic box.
pub fn transform_tangential(field: &HalfSpaceField, direction: Direction) -> Result<HalfSpaceField> {
    field.check_shape()?;
    let expect = match direction {
        Direction::Forward => Domain::Physical,
        Direction::Inverse => Domain::Spectral,
    };
    if field.domain != expect {
        return Err(LabError::ShapeMismatch(format!("field is already in the {:?} domain", field.domain)));
    }
    let stride = field.nodes() * field.components;
    let mut out = field.clone();
    fft_lines(&field.tangential, stride, &mut out.data, direction);
    out.domain = match direction {
        Direction::Forward => Domain::Spectral,
        Direction::Inverse => Domain::Physical,
    };
    Ok(out)
}

pub fn transform_boundary(field: &BoundaryField, direction: Direction) -> Result<BoundaryField> {
    if field.data.len() != field.tangential.mode_count() * field.components {
        return Err(LabError::ShapeMismatch("boundary field length does not match its grid".into()));
    }
    let expect = match direction {
        Direction::Forward => Domain::Physical,
        Direction::Inverse => Domain::Spectral,
    };
    if field.domain != expect {
        return Err(LabError::ShapeMismatch(format!("field is already in the {:?} domain", field.domain)));
    }
    let mut out = field.clone();
    fft_lines(&field.tangential, field.components, &mut out.data, direction);
    out.domain = match direction {
        Direction::Forward => Domain::Spectral,
        Direction::Inverse => Domain::Physical,
    };
    Ok(out)
}

fn fft_lines(grid: &TangentialGrid, stride: usize, data: &mut [Complex64], direction: Direction) {
    let mut planner = FftPlanner::<f64>::new();
    let dims = grid.dims();
    let total = grid.mode_count();
    for d in 0..dims {
        let n = grid.points[d];
        let fft = match direction {
            Direction::Forward => planner.plan_fft_forward(n),
            Direction::Inverse => planner.plan_fft_inverse(n),
        };
        // tangential index stride of dimension d
        let step: usize = grid.points[d + 1..].iter().product();
        let h = grid.spacing(d);
        let scale = match direction {
            Direction::Forward => h,
            Direction::Inverse => 1.0 / (n as f64 * h),
        };
        let mut buf = vec![ZERO; n];
        for start in 0..total {
            if (start / step) % n != 0 {
                continue;
            }
            for off in 0..stride {
                // e^{±iξL} = (−1)^k for the box [−L, L)
                for (k, b) in buf.iter_mut().enumerate() {
                    *b = data[(start + k * step) * stride + off];
                }
                if direction == Direction::Inverse {
                    alternate(&mut buf);
                }
                fft.process(&mut buf);
                if direction == Direction::Forward {
                    alternate(&mut buf);
                }
                for (k, b) in buf.iter().enumerate() {
                    data[(start + k * step) * stride + off] = b * scale;
                }
            }
        }
    }
}

fn alternate(buf: &mut [Complex64]) {
    let n = buf.len() as i64;
    for (k, b) in buf.iter_mut().enumerate() {
        let ks = if (k as i64) < n / 2 { k as i64 } else { k as i64 - n };
        if ks.rem_euclid(2) == 1 {
            *b = -*b;
        }
    }
}
