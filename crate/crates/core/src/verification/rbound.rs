use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::{Domain, HalfSpaceField, NormalGrid, TangentialGrid};
use crate::halfspace::{solve_full_resolvent, ResolventData};
use crate::params::Model;

/// Linear map on flattened grid vectors.
pub type Operator = Box<dyn Fn(&[Complex64]) -> Result<Vec<Complex64>> + Send + Sync>;

pub const MIN_TRIALS: usize = 100;

/// Exponent and quadrature weights of the input and output spaces.
#[derive(Debug, Clone)]
pub struct RBoundSpec {
    pub q: f64,
    /// One weight per entry of an input vector.
    pub input_weights: Vec<f64>,
    pub output_weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RBoundReport {
    pub label: String,
    pub operators: usize,
    pub test_vectors: usize,
    pub trials: usize,
    pub seed: u64,
    /// Largest observed square-function quotient; a lower estimate.
    pub estimate: f64,
    /// Largest observed single-operator quotient.
    pub max_single_norm: f64,
    /// 10th and 90th percentiles of the per-trial maxima.
    pub band: (f64, f64),
}

fn weighted_q(v: &[f64], w: &[f64], q: f64) -> f64 {
    v.iter().zip(w).map(|(a, b)| b * a.powf(q / 2.0)).sum::<f64>().powf(1.0 / q)
}

/// ‖(Σ|g_j|²)^{1/2}‖_q for accumulated pointwise squares.
fn sq_norm(acc: &[f64], w: &[f64], q: f64) -> f64 {
    weighted_q(acc, w, q)
}

fn abs_sq(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.norm_sqr()).collect()
}

/// Input drawn for member j of trial t: an inclusion bit and a Rademacher
/// combination of the test vectors. Streams depend on (seed, t, j) only.
fn draw(seed: u64, t: usize, j: usize, tests: &[Vec<Complex64>]) -> (bool, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((t as u64) << 32) | j as u64);
    let include = rng.gen_bool(0.5);
    let mut f = vec![Complex64::new(0.0, 0.0); tests[0].len()];
    for v in tests {
        let e = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        for (a, b) in f.iter_mut().zip(v) {
            *a += e * b;
        }
    }
    (include, f)
}

fn check_inputs(count: usize, tests: &[Vec<Complex64>], trials: usize, spec: &RBoundSpec) -> Result<()> {
    if count == 0 {
        return Err(LabError::InvalidParameter("empty operator family".into()));
    }
    if tests.is_empty() || tests.iter().any(|v| v.len() != spec.input_weights.len()) {
        return Err(LabError::ShapeMismatch("test vectors must match the input weights".into()));
    }
    if trials < MIN_TRIALS {
        return Err(LabError::InvalidParameter(format!("at least {MIN_TRIALS} trials are required")));
    }
    if !(spec.q > 1.0 && spec.q.is_finite()) {
        return Err(LabError::InvalidParameter("q must lie in (1, inf)".into()));
    }
    Ok(())
}

fn apply(op: &Operator, f: &[Complex64], spec: &RBoundSpec) -> Result<Vec<Complex64>> {
    let g = op(f)?;
    if g.len() != spec.output_weights.len() {
        return Err(LabError::ShapeMismatch("operator output does not match the output weights".into()));
    }
    Ok(g)
}

/// Max over every test vector and every drawn input of ‖Tf‖_q/‖f‖_q, using
/// the draws of member 0. Equals the estimate of the singleton family {T}.
pub fn measured_operator_norm(
    op: &Operator,
    tests: &[Vec<Complex64>],
    trials: usize,
    seed: u64,
    spec: &RBoundSpec,
) -> Result<f64> {
    check_inputs(1, tests, trials, spec)?;
    let mut best: f64 = 0.0;
    let mut quotient = |f: &[Complex64]| -> Result<()> {
        let den = sq_norm(&abs_sq(f), &spec.input_weights, spec.q);
        if den > 0.0 {
            let g = apply(op, f, spec)?;
            best = best.max(sq_norm(&abs_sq(&g), &spec.output_weights, spec.q) / den);
        }
        Ok(())
    };
    for v in tests {
        quotient(v)?;
    }
    for t in 0..trials {
        quotient(&draw(seed, t, 0, tests).1)?;
    }
    Ok(best)
}

/// Randomized lower estimate of the R-bound of a family of operators.
///
/// Each trial walks the family in order, accumulating Σ|T_j f_j|² and
/// Σ|f_j|² over the members whose inclusion bit is set; the quotient is
/// recorded after every inclusion, so a family that extends another in
/// order never reports a smaller estimate.
pub fn rbound_estimate(
    label: &str,
    family: &[(Complex64, Operator)],
    tests: &[Vec<Complex64>],
    trials: usize,
    seed: u64,
    spec: &RBoundSpec,
) -> Result<RBoundReport> {
    check_inputs(family.len(), tests, trials, spec)?;
    let mut single: f64 = 0.0;
    for (_, op) in family {
        for v in tests {
            let den = sq_norm(&abs_sq(v), &spec.input_weights, spec.q);
            if den > 0.0 {
                let g = apply(op, v, spec)?;
                single = single.max(sq_norm(&abs_sq(&g), &spec.output_weights, spec.q) / den);
            }
        }
    }
    let per_trial: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut num = vec![0.0; spec.output_weights.len()];
            let mut den = vec![0.0; spec.input_weights.len()];
            let mut best: f64 = 0.0;
            let mut best_single: f64 = 0.0;
            for (j, (_, op)) in family.iter().enumerate() {
                let (include, f) = draw(seed, t, j, tests);
                let g = apply(op, &f, spec)?;
                let (gf, gg) = (abs_sq(&f), abs_sq(&g));
                let d1 = sq_norm(&gf, &spec.input_weights, spec.q);
                if d1 > 0.0 {
                    best_single = best_single.max(sq_norm(&gg, &spec.output_weights, spec.q) / d1);
                }
                if include {
                    num.iter_mut().zip(&gg).for_each(|(a, b)| *a += b);
                    den.iter_mut().zip(&gf).for_each(|(a, b)| *a += b);
                    let d = sq_norm(&den, &spec.input_weights, spec.q);
                    if d > 0.0 {
                        best = best.max(sq_norm(&num, &spec.output_weights, spec.q) / d);
                    }
                }
            }
            Ok((best.max(best_single), best_single))
        })
        .collect::<Result<_>>()?;
    let mut maxima: Vec<f64> = per_trial.iter().map(|p| p.0).collect();
    single = per_trial.iter().fold(single, |m, p| m.max(p.1));
    let estimate = maxima.iter().fold(single, |m, &v| m.max(v));
    maxima.sort_by(|a, b| a.total_cmp(b));
    let pct = |p: f64| maxima[((maxima.len() - 1) as f64 * p).round() as usize];
    Ok(RBoundReport {
        label: label.into(),
        operators: family.len(),
        test_vectors: tests.len(),
        trials,
        seed,
        estimate,
        max_single_norm: single,
        band: (pct(0.1), pct(0.9)),
    })
}

/// F ↦ λ^{power}·u for the full problem with d = 0, G = 0, K = 0, acting on
/// flattened spectral F. Returns the operator and the L₂ weights of F and u.
pub fn resolvent_operator(
    model: &Model,
    lambda: Complex64,
    power: f64,
    tangential: &TangentialGrid,
    normal: &Arc<NormalGrid>,
) -> (Operator, Vec<f64>) {
    let (model, tg, ng) = (*model, tangential.clone(), normal.clone());
    let n = tg.dims() + 1;
    let weights = l2_weights(&tg, &ng, n);
    let factor = lambda.powf(power);
    let op: Operator = Box::new(move |f: &[Complex64]| {
        let mut data = ResolventData::zeros(&tg, &ng).to_spectral()?;
        data.f = HalfSpaceField { data: f.to_vec(), ..HalfSpaceField::zeros(&tg, &ng, n, Domain::Spectral) };
        let sol = solve_full_resolvent(&data, &model, lambda)?;
        Ok(sol.u.data.iter().map(|z| z * factor).collect())
    });
    (op, weights)
}

/// Weights w with Σ w|f̂|² = ∫|f|² for spectral half-space fields.
pub fn l2_weights(tg: &TangentialGrid, ng: &NormalGrid, comps: usize) -> Vec<f64> {
    let vol = tg.box_volume();
    let w = ng.weights();
    let mut out = Vec::with_capacity(tg.mode_count() * ng.len() * comps);
    for _ in 0..tg.mode_count() {
        for wi in w {
            for _ in 0..comps {
                out.push(wi / vol);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(c: Complex64) -> Operator {
        Box::new(move |f: &[Complex64]| Ok(f.iter().map(|z| z * c).collect()))
    }

    fn tests_and_spec(n: usize, q: f64) -> (Vec<Vec<Complex64>>, RBoundSpec) {
        let tests = (0..4)
            .map(|k| (0..n).map(|i| Complex64::new(((i * (k + 1)) as f64).sin(), (i as f64 * 0.3 + k as f64).cos())).collect())
            .collect();
        let w: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
        (tests, RBoundSpec { q, input_weights: w.clone(), output_weights: w })
    }

    #[test]
    fn singleton_identity_multiple() {
        let (tests, spec) = tests_and_spec(12, 2.0);
        let c = Complex64::new(-1.5, 2.0);
        let r = rbound_estimate("c I", &[(c, scalar(c))], &tests, 100, 5, &spec).unwrap();
        assert!((r.estimate - c.norm()).abs() < 1e-12);
    }

    #[test]
    fn singleton_equals_measured_norm() {
        let (tests, spec) = tests_and_spec(10, 3.0);
        let op: Operator = Box::new(|f: &[Complex64]| {
            Ok(f.iter().enumerate().map(|(i, z)| z * (1.0 + (i as f64).sin()) + f[0] * 0.2).collect())
        });
        let r = rbound_estimate("T", &[(Complex64::new(1.0, 0.0), op)], &tests, 150, 9, &spec).unwrap();
        let op: Operator = Box::new(|f: &[Complex64]| {
            Ok(f.iter().enumerate().map(|(i, z)| z * (1.0 + (i as f64).sin()) + f[0] * 0.2).collect())
        });
        let m = measured_operator_norm(&op, &tests, 150, 9, &spec).unwrap();
        assert!((r.estimate - m).abs() < 1e-12);
    }

    #[test]
    fn scalar_family_is_dominated() {
        let (tests, spec) = tests_and_spec(8, 2.0);
        let l0 = 2.0;
        let fam: Vec<(Complex64, Operator)> = (0..6)
            .map(|j| {
                let l = Complex64::from_polar(l0 * (1.0 + j as f64), 0.3 * j as f64);
                (l, scalar(l.inv()))
            })
            .collect();
        let r = rbound_estimate("inv", &fam, &tests, 200, 1, &spec).unwrap();
        assert!(r.estimate <= (1.0 + 1e-9) / l0);
        assert!(r.estimate >= r.max_single_norm - 1e-12);
    }

    #[test]
    fn monotone_under_extension_and_deterministic() {
        let (tests, spec) = tests_and_spec(8, 2.5);
        let make = |k: usize| -> Vec<(Complex64, Operator)> {
            (0..k)
                .map(|j| {
                    let c = Complex64::new(0.5 + j as f64 * 0.4, -0.2 * j as f64);
                    let op: Operator = Box::new(move |f: &[Complex64]| {
                        Ok(f.iter().enumerate().map(|(i, z)| z * c * (1.0 + 0.1 * (i + j) as f64).ln()).collect())
                    });
                    (c, op)
                })
                .collect()
        };
        let a = rbound_estimate("a", &make(3), &tests, 120, 42, &spec).unwrap();
        let b = rbound_estimate("b", &make(6), &tests, 120, 42, &spec).unwrap();
        let a2 = rbound_estimate("a", &make(3), &tests, 120, 42, &spec).unwrap();
        assert!(a.estimate <= b.estimate + 1e-12);
        assert_eq!(a.estimate.to_bits(), a2.estimate.to_bits());
    }

    #[test]
    fn empty_family_and_few_trials_are_rejected() {
        let (tests, spec) = tests_and_spec(4, 2.0);
        assert!(rbound_estimate("e", &[], &tests, 100, 0, &spec).is_err());
        let c = Complex64::new(1.0, 0.0);
        assert!(rbound_estimate("few", &[(c, scalar(c))], &tests, 99, 0, &spec).is_err());
    }
}
