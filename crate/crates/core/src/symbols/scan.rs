//! Sampled scans over Γ_{ε,λ0,ζ} × ℝ^{N−1}.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{nab_weight, ModeSymbols};
use crate::error::{LabError, Result};
use crate::params::{
    in_sigma_unchecked, sector_inequality_check, Coefficients, Model, SectorSpec, SpectralPoint,
    ZetaCase,
};

/// Deterministic sampling plan: log-uniform |λ| ∈ [λ0, span·λ0], log-uniform
/// |ξ′| ∈ [xi_min, xi_max], uniform admissible angle, plus a fixed set of edge points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub count: usize,
    pub seed: u64,
    pub lambda_span: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    /// Tangential dimension N−1.
    pub dim: usize,
}

impl SamplePlan {
    pub fn new(count: usize, seed: u64) -> Self {
        SamplePlan { count, seed, lambda_span: 1e4, xi_min: 1e-3, xi_max: 1e3, dim: 1 }
    }

    pub fn refined(&self, factor: usize) -> Self {
        SamplePlan { count: self.count * factor, ..*self }
    }

    /// Unit-cube coordinates: edge points first, then the seeded stream.
    /// A refined plan extends the coarse plan's stream.
    pub fn unit_points(&self) -> Vec<[f64; 5]> {
        let mut out = Vec::with_capacity(self.count + 54);
        for &u0 in &[0.0, 0.5, 1.0] {
            for &u1 in &[0.0, 0.5, 1.0] {
                for &u2 in &[0.0, 0.5, 1.0] {
                    for &u4 in &[0.0, 1.0] {
                        out.push([u0, u1, u2, 1.0, u4]);
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.count {
            out.push([rng.gen(), rng.gen(), rng.gen(), rng.gen(), rng.gen()]);
        }
        out
    }
}

/// A sample point with the auxiliary normal coordinate used by exp(−B x_N).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub lambda: Complex64,
    pub xi: Vec<f64>,
    pub x_n: f64,
}

fn max_angle(spec: &SectorSpec, zeta: Complex64, r: f64) -> f64 {
    let cos_edge = |r: f64| (spec.lambda0 / r).min(1.0).acos();
    match spec.zeta_case {
        ZetaCase::C1 => PI - spec.epsilon,
        ZetaCase::C2 => {
            let ratio = (zeta.re / zeta.im).abs();
            (1.0 / ratio).atan().min(cos_edge(r))
        }
        ZetaCase::C3 => cos_edge(r),
    }
}

/// Maps unit coordinates into the region. Points falling into the excluded
/// disk of Λ map to `None`.
pub fn map_unit_point(u: &[f64; 5], plan: &SamplePlan, model: &Model) -> Option<ScanPoint> {
    let spec = &model.sector;
    let r = spec.lambda0 * plan.lambda_span.powf(u[0]);
    let th = (2.0 * u[1] - 1.0) * max_angle(spec, model.fluid.zeta, r);
    let mut lambda = Complex64::from_polar(r, th);
    if spec.zeta_case != ZetaCase::C1 {
        // keep Re λ ≥ λ0 exact under rounding
        lambda.re = lambda.re.max(spec.lambda0);
    }
    if !model.contains(lambda) {
        return None;
    }
    let xr = plan.xi_min * (plan.xi_max / plan.xi_min).powf(u[2]);
    let xi = if plan.dim == 1 {
        vec![if u[3] < 0.5 { -xr } else { xr }]
    } else {
        let phi = 2.0 * PI * u[3];
        vec![xr * phi.cos(), xr * phi.sin()]
    };
    let x_n = 10f64.powf(-2.0 + 3.0 * u[4]) / (r.sqrt() + xr);
    Some(ScanPoint { lambda, xi, x_n })
}

pub fn sample_points(plan: &SamplePlan, model: &Model) -> Result<Vec<ScanPoint>> {
    Ok(sample_points_with_units(plan, model)?.into_iter().map(|(_, p)| p).collect())
}

/// Sample points together with the unit coordinates they came from.
pub fn sample_points_with_units(
    plan: &SamplePlan,
    model: &Model,
) -> Result<Vec<([f64; 5], ScanPoint)>> {
    if !(model.sector.lambda0 > 0.0) {
        return Err(LabError::InvalidParameter(
            "sampling plans need lambda0 > 0 (the origin is excluded)".into(),
        ));
    }
    if plan.dim != 1 && plan.dim != 2 {
        return Err(LabError::InvalidParameter("tangential dimension must be 1 or 2".into()));
    }
    Ok(plan
        .unit_points()
        .into_iter()
        .filter_map(|u| map_unit_point(&u, plan, model).map(|p| (u, p)))
        .collect())
}

/// Compass search for a local maximum of `f` over the unit cube, started at `u`.
/// Coordinates listed in `frozen` are left alone.
pub fn polish_max<F: Fn(&[f64; 5]) -> f64>(f: F, u: [f64; 5], frozen: &[usize]) -> ([f64; 5], f64) {
    let mut best = u;
    let mut val = f(&u);
    if !val.is_finite() {
        return (best, val);
    }
    let mut step = 0.01;
    let mut evals = 0;
    while step > 1e-6 && evals < 300 {
        let mut improved = false;
        for i in 0..5 {
            if frozen.contains(&i) {
                continue;
            }
            for dir in [1.0, -1.0] {
                let mut t = best;
                t[i] = (t[i] + dir * step).clamp(0.0, 1.0);
                if t[i] == best[i] {
                    continue;
                }
                evals += 1;
                let v = f(&t);
                if v > val {
                    val = v;
                    best = t;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, val)
}

// ---------------------------------------------------------------------------
// Lower bound for N(A,B)

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NabViolation {
    pub lambda: Complex64,
    pub xi: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NabReport {
    pub lambda0_found: f64,
    pub c_found: f64,
    pub min_ratio: f64,
    pub samples: usize,
    pub verification_samples: usize,
    pub violation_count: usize,
    pub violations: Vec<NabViolation>,
    pub floor: f64,
}

fn nab_ratio(model: &Model, p: &ScanPoint) -> f64 {
    let k = model.coefficients_unchecked(p.lambda);
    let s: f64 = p.xi.iter().map(|x| x * x).sum();
    match ModeSymbols::compute(&k, s) {
        Ok(ms) => ms.lop.n.norm() / nab_weight(p.lambda, s.sqrt()),
        Err(_) => 0.0,
    }
}

fn min_ratio(model: &Model, plan: &SamplePlan) -> Result<(f64, usize)> {
    let pts = sample_points(plan, model)?;
    let m = pts.par_iter().map(|p| nab_ratio(model, p)).reduce(|| f64::INFINITY, f64::min);
    Ok((m, pts.len()))
}

/// Local refinement of the sampled minimum, started from the 4 best samples.
fn polish_min_ratio(model: &Model, plan: &SamplePlan) -> Result<f64> {
    let pts = sample_points_with_units(plan, model)?;
    let mut scored: Vec<(f64, [f64; 5])> =
        pts.par_iter().map(|(u, p)| (nab_ratio(model, p), *u)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let frozen: &[usize] = if plan.dim == 1 { &[3, 4] } else { &[4] };
    let best = scored
        .par_iter()
        .take(4)
        .map(|(_, u)| {
            let f = |u: &[f64; 5]| match map_unit_point(u, plan, model) {
                Some(p) => -nab_ratio(model, &p),
                None => f64::NEG_INFINITY,
            };
            let (u, v) = polish_max(f, *u, frozen);
            let polished = -v;
            match map_unit_point(&u, plan, model).and_then(|p| newton_zero(model, &p)) {
                Some(r) => polished.min(r),
                None => polished,
            }
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

/// Newton iteration on N(·, ξ′) from `p`; returns the ratio at the root when it
/// converges to a point of the region.
fn newton_zero(model: &Model, p: &ScanPoint) -> Option<f64> {
    let s: f64 = p.xi.iter().map(|x| x * x).sum();
    let l = newton_root(model, p.lambda, s)?;
    if !model.contains(l) {
        return None;
    }
    let q = ScanPoint { lambda: l, xi: p.xi.clone(), x_n: p.x_n };
    Some(nab_ratio(model, &q))
}

/// Newton on λ ↦ N(λ, s); None unless the step size converges.
fn newton_root(model: &Model, start: Complex64, s: f64) -> Option<Complex64> {
    let n = |l: Complex64| {
        ModeSymbols::compute(&model.coefficients_unchecked(l), s).ok().map(|m| m.lop.n)
    };
    let mut l = start;
    for _ in 0..60 {
        let h = 1e-7 * l.norm();
        let d = (n(l + h)? - n(l - h)?) / (2.0 * h);
        let step = n(l)? / d;
        if !step.is_finite() {
            return None;
        }
        l -= step;
        if step.norm() <= 1e-13 * l.norm() {
            return Some(l);
        }
    }
    None
}

/// Newton in (r, ξ) for N(r·e^{iφ}, ξ²) = 0 with the ray angle φ fixed.
fn ray_crossing(model: &Model, phi: f64, r0: f64, x0: f64) -> Option<Complex64> {
    let f = |r: f64, x: f64| {
        ModeSymbols::compute(&model.coefficients_unchecked(Complex64::from_polar(r, phi)), x * x)
            .ok()
            .map(|m| m.lop.n)
    };
    let (mut r, mut x) = (r0, x0);
    for _ in 0..80 {
        let hr = 1e-7 * r;
        let hx = 1e-7 * x.max(1e-3);
        let v = f(r, x)?;
        let dr = (f(r + hr, x)? - f(r - hr, x)?) / (2.0 * hr);
        let dx = (f(r, x + hx)? - f(r, (x - hx).max(0.0))?) / (x + hx - (x - hx).max(0.0));
        let det = dr.re * dx.im - dx.re * dr.im;
        if !(det.abs() > 0.0) || !det.is_finite() {
            return None;
        }
        let sr = (v.re * dx.im - dx.re * v.im) / det;
        let sx = (dr.re * v.im - v.re * dr.im) / det;
        r -= sr;
        x = (x - sx).abs();
        if !(r > 0.0 && r.is_finite() && x.is_finite()) {
            return None;
        }
        if sr.abs() <= 1e-13 * r && sx.abs() <= 1e-13 * x.max(1.0) {
            return Some(Complex64::from_polar(r, phi));
        }
    }
    None
}

/// Points where zero curves of N cross the rays arg λ = ±(π − ε), moved
/// 1e-9 rad into the sector. A zero curve inside the region reaches its
/// largest |λ| either there or at an interior critical point, which the
/// sampled minima cover. Independent of λ0.
fn edge_roots(model: &Model) -> Vec<Complex64> {
    let theta = std::f64::consts::PI - model.sector.epsilon;
    let mut seeds = vec![];
    for ir in 0..40 {
        let r = 10f64.powf(-1.0 + 5.0 * ir as f64 / 39.0);
        for ix in 0..40 {
            let x = 10f64.powf(-2.0 + 5.0 * ix as f64 / 39.0);
            for sign in [1.0, -1.0] {
                seeds.push((sign, r, x));
            }
        }
    }
    seeds
        .par_iter()
        .filter_map(|&(sign, r, x)| {
            ray_crossing(model, sign * theta, r, x).map(|z| z * Complex64::from_polar(1.0, -sign * 1e-9))
        })
        .collect()
}

/// Searches the smallest λ0 ∈ [1, 2¹⁶] at which the sampled minimum of
/// |N|/[(|λ|+|ξ′|)(|λ|^{1/2}+|ξ′|)²] exceeds [`super::NAB_FLOOR`]. The minimum
/// at that λ0 is locally refined, and c = 0.99·min is re-checked on an
/// independent sample set.
pub fn nab_lower_bound_scan(model: &Model, plan: &SamplePlan) -> Result<NabReport> {
    let floor = super::NAB_FLOOR;
    let roots = edge_roots(model);
    let at = |l0: f64| -> Result<(f64, usize)> {
        let m = Model { sector: model.sector.with_lambda0(l0), ..*model };
        let (r, n) = min_ratio(&m, plan)?;
        if roots.iter().any(|&z| m.contains(z)) {
            return Ok((0.0, n));
        }
        Ok((r.min(polish_min_ratio(&m, plan)?), n))
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut best = at(hi)?;
    while !(best.0 > floor) {
        lo = hi;
        hi *= 2.0;
        if hi > 65536.0 {
            return Err(LabError::SearchFailed("no lambda0 <= 2^16 clears the floor".into()));
        }
        best = at(hi)?;
    }
    if lo > 0.0 {
        for _ in 0..12 {
            let mid = (lo * hi).sqrt();
            let r = at(mid)?;
            if r.0 > floor {
                hi = mid;
                best = r;
            } else {
                lo = mid;
            }
        }
    }
    let lambda0 = hi;
    let check_model = Model { sector: model.sector.with_lambda0(lambda0), ..*model };
    let min_found = best.0;
    let c = 0.99 * min_found;
    let check_plan = SamplePlan { seed: plan.seed ^ 0x9E37_79B9_7F4A_7C15, ..*plan };
    let pts = sample_points(&check_plan, &check_model)?;
    let ratios: Vec<f64> = pts.par_iter().map(|p| nab_ratio(&check_model, p)).collect();
    let mut violations = Vec::new();
    let mut count = 0;
    for (p, &r) in pts.iter().zip(&ratios) {
        if !(r >= c) {
            count += 1;
            if violations.len() < 16 {
                violations.push(NabViolation {
                    lambda: p.lambda,
                    xi: p.xi.iter().map(|x| x * x).sum::<f64>().sqrt(),
                    ratio: r,
                });
            }
        }
    }
    Ok(NabReport {
        lambda0_found: lambda0,
        c_found: c,
        min_ratio: min_found,
        samples: best.1,
        verification_samples: pts.len(),
        violation_count: count,
        violations,
        floor,
    })
}

// ---------------------------------------------------------------------------
// Multiplier classes

/// Symbols covered by the multiplier-class scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolKind {
    A,
    AInv,
    B,
    BInv,
    L11,
    L12,
    L21,
    L22,
    DetL,
    DetLInv,
    Q,
    QPrime,
    /// n_{j1} for tangential index j (0-based).
    NTan1(usize),
    NTan2(usize),
    NNormal1,
    NNormal2,
    DetLOverN,
    ExpB,
}

impl SymbolKind {
    /// Every symbol for tangential dimension `dim`.
    pub fn all(dim: usize) -> Vec<SymbolKind> {
        use SymbolKind::*;
        let mut v = vec![A, AInv, B, BInv, L11, L12, L21, L22, DetL, DetLInv, Q, QPrime];
        for j in 0..dim {
            v.push(NTan1(j));
            v.push(NTan2(j));
        }
        v.extend([NNormal1, NNormal2, DetLOverN, ExpB]);
        v
    }

    /// Default (order, type).
    pub fn default_class(&self) -> (f64, u8) {
        use SymbolKind::*;
        match self {
            A | B => (1.0, 1),
            AInv | BInv => (-1.0, 1),
            L11 | L22 => (1.0, 1),
            L12 => (2.0, 1),
            L21 | Q | ExpB => (0.0, 1),
            DetL => (2.0, 1),
            DetLInv | QPrime => (-2.0, 1),
            NTan1(_) | NTan2(_) | NNormal1 | NNormal2 => (-2.0, 1),
            DetLOverN => (-1.0, 1),
        }
    }

    pub fn label(&self) -> String {
        use SymbolKind::*;
        match self {
            NTan1(j) => format!("n_{}1", j + 1),
            NTan2(j) => format!("n_{}2", j + 1),
            NNormal1 => "n_N1".into(),
            NNormal2 => "n_N2".into(),
            other => format!("{other:?}"),
        }
    }

    fn eval(&self, ms: &ModeSymbols, xi: &[f64], x_n: f64) -> Complex64 {
        use SymbolKind::*;
        let one = Complex64::new(1.0, 0.0);
        let (a, b, l) = (ms.core.a, ms.core.b, &ms.lop);
        match self {
            A => a,
            AInv => one / a,
            B => b,
            BInv => one / b,
            L11 => l.l11,
            L12 => l.l12,
            L21 => l.l21,
            L22 => l.l22,
            DetL => l.det_l,
            DetLInv => one / l.det_l,
            Q => ms.q,
            QPrime => ms.q_prime,
            NTan1(j) => Complex64::new(0.0, xi[*j]) * ms.n_factors()[0],
            NTan2(j) => Complex64::new(0.0, xi[*j]) * ms.n_factors()[1],
            NNormal1 => ms.n_factors()[2],
            NNormal2 => ms.n_factors()[3],
            DetLOverN => l.det_l / l.n,
            ExpB => (-b * x_n).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierClassSpec {
    pub order: f64,
    pub class_type: u8,
    pub max_deriv_order: usize,
    pub region: SectorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeRecord {
    pub kappa: Vec<usize>,
    pub ell: usize,
    pub worst_ratio: f64,
    pub argmax_point: Option<ScanPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierScanReport {
    pub symbol: String,
    pub class: (f64, u8),
    pub per_derivative: Vec<DerivativeRecord>,
    /// Fitted decay constant c′ for exp(−B x_N).
    pub decay_fit: Option<f64>,
    pub violations: Vec<String>,
}

/// Multi-indices of length `dim` and order ≤ `max`.
pub fn multi_indices(dim: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    for total in 0..=max {
        if dim == 1 {
            out.push(vec![total]);
        } else {
            for i in (0..=total).rev() {
                out.push(vec![i, total - i]);
            }
        }
    }
    out
}

type SymVec = Vec<Complex64>;

fn sym_vec(model: &Model, kinds: &[SymbolKind], lambda: Complex64, xi: &[f64], x_n: f64) -> SymVec {
    let k: Coefficients = model.coefficients_unchecked(lambda);
    let s: f64 = xi.iter().map(|x| x * x).sum();
    match ModeSymbols::compute(&k, s) {
        Ok(ms) => kinds.iter().map(|kind| kind.eval(&ms, xi, x_n)).collect(),
        Err(_) => vec![Complex64::new(f64::NAN, f64::NAN); kinds.len()],
    }
}

fn lin(a: &SymVec, wa: f64, b: &SymVec, wb: f64) -> SymVec {
    a.iter().zip(b).map(|(x, y)| x * wa + y * wb).collect()
}

/// Richardson-extrapolated central differences of a vector-valued function.
fn d_xi<F: Fn(&[f64]) -> SymVec>(f: &F, xi: &[f64], kappa: &[usize], h: f64) -> SymVec {
    let Some(i) = kappa.iter().position(|&k| k > 0) else {
        return f(xi);
    };
    let shifted = |d: f64| {
        let mut x = xi.to_vec();
        x[i] += d;
        x
    };
    let pure_second = kappa[i] == 2 && kappa.iter().enumerate().all(|(j, &k)| j == i || k == 0);
    let stencil = |h: f64| -> SymVec {
        if pure_second {
            let (p, z, m) = (f(&shifted(h)), f(xi), f(&shifted(-h)));
            p.iter().zip(&z).zip(&m).map(|((p, z), m)| (p - z * 2.0 + m) / (h * h)).collect()
        } else {
            let mut rest = kappa.to_vec();
            rest[i] -= 1;
            let p = d_xi(f, &shifted(h), &rest, h);
            let m = d_xi(f, &shifted(-h), &rest, h);
            lin(&p, 0.5 / h, &m, -0.5 / h)
        }
    };
    let coarse = stencil(h);
    let fine = stencil(h / 2.0);
    lin(&fine, 4.0 / 3.0, &coarse, -1.0 / 3.0)
}

/// τ∂_τ at fixed Re λ, Richardson-extrapolated.
fn tau_d<F: Fn(Complex64) -> SymVec>(f: &F, lambda: Complex64, h: f64) -> SymVec {
    let step = |h: f64| {
        let p = f(lambda + Complex64::new(0.0, h));
        let m = f(lambda - Complex64::new(0.0, h));
        lin(&p, 0.5 / h, &m, -0.5 / h)
    };
    let d = lin(&step(h / 2.0), 4.0 / 3.0, &step(h), -1.0 / 3.0);
    d.into_iter().map(|v| v * lambda.im).collect()
}

/// Derivatives ∂_{ξ′}^κ(τ∂_τ)^ℓ of all `kinds` at one point.
fn derivatives(
    model: &Model,
    kinds: &[SymbolKind],
    p: &ScanPoint,
    kappa: &[usize],
    ell: usize,
) -> SymVec {
    let xin = p.xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = p.lambda.norm().sqrt() + xin;
    let h = 1e-4 * scale;
    let h_tau = 1e-4 * scale * scale;
    let x_n = p.x_n;
    if ell == 0 {
        let f = |xi: &[f64]| sym_vec(model, kinds, p.lambda, xi, x_n);
        d_xi(&f, &p.xi, kappa, h)
    } else {
        let f = |xi: &[f64]| {
            let g = |lam: Complex64| sym_vec(model, kinds, lam, xi, x_n);
            tau_d(&g, p.lambda, h_tau)
        };
        d_xi(&f, &p.xi, kappa, h)
    }
}

/// Worst ratios of |∂_{ξ′}^κ(τ∂_τ)^ℓ m| against the class weight over the plan,
/// for every symbol in `kinds` at once. `classes[i]` overrides the default class.
fn decay_ratio(model: &Model, p: &ScanPoint) -> f64 {
    let k = model.coefficients_unchecked(p.lambda);
    let s: f64 = p.xi.iter().map(|x| x * x).sum();
    let b = (k.lambda / k.alpha + s).sqrt();
    b.re / (p.lambda.norm().sqrt() + s.sqrt())
}

fn decay_fit_on(pts: &[([f64; 5], ScanPoint)], model: &Model, plan: &SamplePlan) -> f64 {
    let frozen: &[usize] = if plan.dim == 1 { &[3, 4] } else { &[4] };
    let (u0, sampled) = pts
        .iter()
        .map(|(u, p)| (*u, decay_ratio(model, p)))
        .fold(([0.0; 5], f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let polished = -polish_max(
        |u| map_unit_point(u, plan, model).map_or(f64::NEG_INFINITY, |p| -decay_ratio(model, &p)),
        u0,
        frozen,
    )
    .1;
    sampled.min(polished)
}

/// c′ = inf Re B/(|λ|^{1/2}+|ξ′|) over the region, so that |e^{−Bx}| ≤ e^{−c′(|λ|^{1/2}+|ξ′|)x}.
pub fn decay_fit(model: &Model, plan: &SamplePlan) -> Result<f64> {
    let pts = sample_points_with_units(plan, model)?;
    if pts.is_empty() {
        return Err(LabError::InvalidParameter("sampling plan misses the region".into()));
    }
    Ok(decay_fit_on(&pts, model, plan))
}

pub fn multiplier_class_scan_many(
    model: &Model,
    kinds: &[SymbolKind],
    classes: &[(f64, u8)],
    max_deriv_order: usize,
    plan: &SamplePlan,
) -> Result<Vec<MultiplierScanReport>> {
    if max_deriv_order > 2 {
        return Err(LabError::InvalidParameter("maxDerivOrder must be <= 2".into()));
    }
    if classes.len() != kinds.len() || classes.iter().any(|c| c.1 != 1 && c.1 != 2) {
        return Err(LabError::InvalidParameter("one class of type 1 or 2 per symbol".into()));
    }
    let pts = sample_points_with_units(plan, model)?;
    if pts.is_empty() {
        return Err(LabError::InvalidParameter("sampling plan misses the region".into()));
    }
    let frozen: &[usize] = if plan.dim == 1 { &[3] } else { &[] };
    let decay = decay_fit_on(&pts, model, plan);
    let c_used = 0.5 * decay;
    let indices = multi_indices(plan.dim, max_deriv_order);
    let mut combos = vec![];
    for kappa in &indices {
        for ell in 0..2 {
            combos.push((kappa.clone(), ell));
        }
    }
    let ratios = |p: &ScanPoint, ks: &[SymbolKind], cls: &[(f64, u8)], kappa: &[usize], ell: usize| {
        let xin = p.xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = p.lambda.norm().sqrt() + xin;
        let order: usize = kappa.iter().sum();
        let d = derivatives(model, ks, p, kappa, ell);
        ks.iter()
            .zip(cls)
            .zip(&d)
            .map(|((kind, &(s, ty)), v)| {
                let mut w = if ty == 1 {
                    scale.powf(s - order as f64)
                } else {
                    scale.powf(s) * xin.powi(-(order as i32))
                };
                if *kind == SymbolKind::ExpB {
                    w *= (-c_used * scale * p.x_n).exp();
                }
                v.norm() / w
            })
            .collect::<Vec<f64>>()
    };
    // per_point[point][combo][kind]
    let per_point: Vec<Vec<Vec<f64>>> = pts
        .par_iter()
        .map(|(_, p)| combos.iter().map(|(kappa, ell)| ratios(p, kinds, classes, kappa, *ell)).collect())
        .collect();
    let jobs: Vec<(usize, usize)> =
        (0..kinds.len()).flat_map(|ki| (0..combos.len()).map(move |ci| (ki, ci))).collect();
    let records: Vec<(DerivativeRecord, Option<String>)> = jobs
        .par_iter()
        .map(|&(ki, ci)| {
            let (kappa, ell) = &combos[ci];
            let mut worst = 0.0;
            let mut arg = None;
            for (pi, row) in per_point.iter().enumerate() {
                let r = row[ci][ki];
                if !r.is_finite() {
                    let rec = DerivativeRecord {
                        kappa: kappa.clone(),
                        ell: *ell,
                        worst_ratio: f64::INFINITY,
                        argmax_point: Some(pts[pi].1.clone()),
                    };
                    return (rec, Some(format!("non-finite ratio at kappa={kappa:?}, ell={ell}")));
                }
                if r > worst {
                    worst = r;
                    arg = Some(pi);
                }
            }
            let mut point = arg.map(|i| pts[i].1.clone());
            if let Some(i) = arg {
                let f = |u: &[f64; 5]| match map_unit_point(u, plan, model) {
                    Some(p) => ratios(&p, &kinds[ki..=ki], &classes[ki..=ki], kappa, *ell)[0],
                    None => f64::NEG_INFINITY,
                };
                let (u, v) = polish_max(f, pts[i].0, frozen);
                if v.is_finite() && v > worst {
                    worst = v;
                    point = map_unit_point(&u, plan, model);
                }
            }
            (DerivativeRecord { kappa: kappa.clone(), ell: *ell, worst_ratio: worst, argmax_point: point }, None)
        })
        .collect();
    let mut reports = vec![];
    for (ki, kind) in kinds.iter().enumerate() {
        let mine = &records[ki * combos.len()..(ki + 1) * combos.len()];
        reports.push(MultiplierScanReport {
            symbol: kind.label(),
            class: classes[ki],
            per_derivative: mine.iter().map(|r| r.0.clone()).collect(),
            decay_fit: (*kind == SymbolKind::ExpB).then_some(decay),
            violations: mine.iter().filter_map(|r| r.1.clone()).collect(),
        });
    }
    Ok(reports)
}

pub fn multiplier_class_scan(
    kind: SymbolKind,
    spec: &MultiplierClassSpec,
    model: &Model,
    plan: &SamplePlan,
) -> Result<MultiplierScanReport> {
    let m = Model { sector: spec.region, ..*model };
    let mut r = multiplier_class_scan_many(
        &m,
        &[kind],
        &[(spec.order, spec.class_type)],
        spec.max_deriv_order,
        plan,
    )?;
    Ok(r.remove(0))
}

// ---------------------------------------------------------------------------
// Elementary sector claims

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorScanReport {
    pub samples: usize,
    /// Violations of |aλ+|ξ′|²| ≥ sin(ε/2)(a|λ|+|ξ′|²).
    pub basic_violations: usize,
    /// π − max |arg(AB)|.
    pub ab_sector_eps0: f64,
    /// min |AB+|ξ′|²|/(|λ|+|ξ′|²).
    pub int_ab_c: f64,
    /// min and max of |A|/(|λ|^{1/2}+|ξ′|).
    pub a_bounds: (f64, f64),
    pub b_bounds: (f64, f64),
}

/// Lemma-basic inequality on random (a, λ, ξ′) with λ ∈ Σ_ε, and the
/// AB-related sector constants on the model's Γ region.
pub fn sector_scan(model: &Model, plan: &SamplePlan) -> Result<SectorScanReport> {
    let eps = model.sector.epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let raw: Vec<[f64; 4]> =
        (0..plan.count).map(|_| [rng.gen(), rng.gen(), rng.gen(), rng.gen()]).collect();
    let basic_violations = raw
        .par_iter()
        .filter(|u| {
            let a = 10f64.powf(-3.0 + 6.0 * u[0]);
            let r = 10f64.powf(-4.0 + 8.0 * u[1]);
            let lam = Complex64::from_polar(r, (2.0 * u[2] - 1.0) * (PI - eps));
            let xi = 10f64.powf(-3.0 + 6.0 * u[3]);
            if !in_sigma_unchecked(lam, eps, 0.0) {
                return false;
            }
            !sector_inequality_check(&SpectralPoint::new(lam, vec![xi]), a, eps)
                .map(|r| r.holds)
                .unwrap_or(false)
        })
        .count();
    let pts = sample_points(plan, model)?;
    let stats: Vec<[f64; 4]> = pts
        .par_iter()
        .map(|p| {
            let k = model.coefficients_unchecked(p.lambda);
            let s: f64 = p.xi.iter().map(|x| x * x).sum();
            let c2 = 2.0 * k.alpha + k.beta + k.zeta;
            let a = (p.lambda / c2 + s).sqrt();
            let b = (p.lambda / k.alpha + s).sqrt();
            let scale = p.lambda.norm().sqrt() + s.sqrt();
            [
                (a * b).arg().abs(),
                (a * b + s).norm() / (p.lambda.norm() + s),
                a.norm() / scale,
                b.norm() / scale,
            ]
        })
        .collect();
    let fold = |i: usize, init: f64, f: fn(f64, f64) -> f64| stats.iter().map(|s| s[i]).fold(init, f);
    Ok(SectorScanReport {
        samples: plan.count,
        basic_violations,
        ab_sector_eps0: PI - fold(0, 0.0, f64::max),
        int_ab_c: fold(1, f64::INFINITY, f64::min),
        a_bounds: (fold(2, f64::INFINITY, f64::min), fold(2, 0.0, f64::max)),
        b_bounds: (fold(3, f64::INFINITY, f64::min), fold(3, 0.0, f64::max)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormIdentityReport {
    pub samples: usize,
    pub max_form_gap: f64,
    pub max_det_gap: f64,
    pub max_n_ptilde_gap: f64,
    pub max_n_e_gap: f64,
}

/// Largest relative disagreement between the two printed Lopatinski forms and
/// the factorizations of det L and N over the plan.
pub fn form_identity_scan(model: &Model, plan: &SamplePlan) -> Result<FormIdentityReport> {
    let pts = sample_points(plan, model)?;
    let gaps: Vec<[f64; 4]> = pts
        .par_iter()
        .map(|p| {
            let k = model.coefficients_unchecked(p.lambda);
            let s: f64 = p.xi.iter().map(|x| x * x).sum();
            match ModeSymbols::compute(&k, s) {
                Ok(ms) => {
                    let l = ms.lop;
                    [
                        l.form_gap,
                        super::rel_gap(l.det_l, l.p * l.d),
                        super::rel_gap(l.n, l.p * l.n_tilde),
                        super::rel_gap(l.n, l.l11 * l.e - p.lambda * l.l12 * l.l21),
                    ]
                }
                Err(_) => [f64::INFINITY; 4],
            }
        })
        .collect();
    let mx = |i: usize| gaps.iter().map(|g| g[i]).fold(0.0, f64::max);
    Ok(FormIdentityReport {
        samples: pts.len(),
        max_form_gap: mx(0),
        max_det_gap: mx(1),
        max_n_ptilde_gap: mx(2),
        max_n_e_gap: mx(3),
    })
}

/// Direct evaluation of M against its Taylor branch at |B−A| = rel·(|A|+|B|).
pub fn removable_singularity_gap(a: Complex64, rel: f64, x: f64) -> f64 {
    let dir = Complex64::new(1.0, 0.37).unscale(Complex64::new(1.0, 0.37).norm());
    // |B−A| = rel(|A|+|B|) solved to first order
    let b = a + dir * (rel * 2.0 * a.norm());
    let direct = ((-b * x).exp() - (-a * x).exp()) / (b - a);
    let taylor = super::m_taylor(a, b, x);
    (direct - taylor).norm() / taylor.norm()
}
