use num_complex::Complex64;
use resolvent_lab::bent::*;
use resolvent_lab::grid::{NormalGrid, TangentialGrid};
use resolvent_lab::halfspace::solve_reduced_resolvent;
use resolvent_lab::params::Model;
use std::sync::Arc;

fn setup() -> (TangentialGrid, Arc<NormalGrid>, Model) {
    let tg = TangentialGrid::line(64, 8.0).unwrap();
    let grid = Arc::new(NormalGrid::mapped(48, 40.0, 4.0).unwrap());
    (tg, grid, Model::baseline())
}

/// Coarser grid for the many-solve contraction measurements.
fn coarse() -> (TangentialGrid, Arc<NormalGrid>, Model) {
    let tg = TangentialGrid::line(32, 8.0).unwrap();
    let grid = Arc::new(NormalGrid::mapped(32, 40.0, 4.0).unwrap());
    (tg, grid, Model::baseline())
}

fn bump(a: f64) -> DiffeoSpec {
    DiffeoSpec { amplitude: a, width: 1.0 }
}

const LAMBDA: Complex64 = Complex64::new(16.0, 0.0);

#[test]
fn identity_reproduces_the_flat_solver() {
    let (tg, grid, model) = setup();
    let data = random_data(&tg, &grid, 11);
    let sol = neumann_solve(&data, &DiffeoSpec::identity(), &model, LAMBDA, &NeumannOptions::default()).unwrap();
    assert_eq!(sol.state.history.len(), 1);
    let (u, h) = solve_reduced_resolvent(&data.f, &data.g, &data.k, &model, LAMBDA).unwrap();
    let u = u.to_physical().unwrap();
    let scale = u.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = sol.v.data.iter().zip(&u.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err <= 1e-12 * scale, "{err:e}");
    let h = h.to_physical().unwrap();
    let hs = h.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = sol.h.data.iter().zip(&h.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err <= 1e-12 * hs, "{err:e}");
    assert!((sol.pullback_constant - 1.0).abs() < 1e-14);
}

#[test]
fn small_bump_contracts_and_solves_the_physical_problem() {
    let (tg, grid, model) = setup();
    let data = random_data(&tg, &grid, 5);
    let sol = neumann_solve(&data, &bump(0.05), &model, LAMBDA, &NeumannOptions::default()).unwrap();
    assert!(sol.state.converged);
    assert!(sol.state.ratios().iter().all(|&r| r < 0.5), "{:?}", sol.state.ratios());
    assert!(sol.residual.max_relative <= 1e-6, "{:?}", sol.residual);
    assert!(sol.bounds.m1 < 0.05);
    // f∘Φ moves mass but barely changes the norm
    assert!((sol.pullback_constant - 1.0).abs() < 0.05, "{}", sol.pullback_constant);
}

#[test]
fn contraction_grows_with_the_amplitude() {
    let (tg, grid, model) = coarse();
    let data = random_data(&tg, &grid, 5);
    let (mut last_run, mut last_proxy) = (0.0, 0.0);
    for a in [0.01, 0.02, 0.04] {
        let sol = neumann_solve(&data, &bump(a), &model, LAMBDA, &NeumannOptions::default()).unwrap();
        let run = sol.state.asymptotic_ratio(sol.data_norm);
        let proxy = contraction_proxy(&bump(a), &model, LAMBDA, &tg, &grid, 8, 10, 1).unwrap();
        assert!(run > last_run && proxy > last_proxy, "a = {a}: {run} {proxy}");
        (last_run, last_proxy) = (run, proxy);
    }
}

#[test]
fn update_ratio_matches_the_proxy() {
    let (tg, grid, model) = coarse();
    let data = random_data(&tg, &grid, 5);
    let opts = NeumannOptions { max_iter: 60, tol: 1e-14 };
    for a in [0.2, 0.3] {
        let sol = neumann_solve(&data, &bump(a), &model, LAMBDA, &opts).unwrap();
        let run = sol.state.asymptotic_ratio(sol.data_norm);
        let proxy = contraction_proxy(&bump(a), &model, LAMBDA, &tg, &grid, 8, 20, 1).unwrap();
        assert!((run / proxy - 1.0).abs() <= 0.1, "a = {a}: {run} vs {proxy}");
    }
}

#[test]
fn steep_bump_diverges_with_the_measured_ratio() {
    let (tg, grid, model) = setup();
    let data = random_data(&tg, &grid, 5);
    match neumann_solve(&data, &bump(0.8), &model, LAMBDA, &NeumannOptions::default()) {
        Err(resolvent_lab::LabError::Divergence { ratio }) => assert!(ratio >= 1.0),
        other => panic!("expected divergence, got {:?}", other.map(|s| s.state.ratios())),
    }
}
