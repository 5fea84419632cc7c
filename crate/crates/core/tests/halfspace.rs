use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resolvent_lab::grid::{BoundaryField, HalfSpaceField, NormalGrid, TangentialGrid};
use resolvent_lab::halfspace::*;
use resolvent_lab::params::Model;
use std::sync::Arc;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// v = a·e^{−x}: returns (F block, G′) for one mode with N = 2.
fn lame_data(model: &Model, lambda: Complex64, xi: f64, a: [Complex64; 2], grid: &NormalGrid) -> (Vec<Complex64>, Vec<Complex64>) {
    let k = model.coefficients(lambda).unwrap();
    let cc = k.alpha + k.beta + k.zeta;
    let s = xi * xi;
    let d = I * xi * a[0] - a[1];
    let lead = k.lambda + k.alpha * s - k.alpha;
    let f: Vec<Complex64> = grid
        .nodes
        .iter()
        .flat_map(|&x| {
            let e = (-x).exp();
            [e * (lead * a[0] - cc * I * xi * d), e * (lead * a[1] + cc * d)]
        })
        .collect();
    let g = vec![k.alpha * (a[0] - I * xi * a[1]), 2.0 * k.alpha * a[1] - (k.beta + k.zeta) * d];
    (f, g)
}

fn lame_error(nodes: usize, lambda: Complex64, xi: f64) -> f64 {
    let model = Model::baseline();
    let grid = NormalGrid::mapped(nodes, 40.0, 4.0).unwrap();
    let a = [c(0.7, -0.2), c(-0.4, 0.9)];
    let (f, g) = lame_data(&model, lambda, xi, a, &grid);
    let v = lame_mode(&model.coefficients(lambda).unwrap(), &[xi], &grid, &f, &g).unwrap();
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &x) in grid.nodes.iter().enumerate() {
        for comp in 0..2 {
            let exact = a[comp] * (-x).exp();
            num += (v[2 * i + comp] - exact).norm_sqr();
            den += exact.norm_sqr();
        }
    }
    (num / den).sqrt()
}

#[test]
fn lame_manufactured_solution_converges() {
    for &(lambda, xi) in &[(c(4.0, 0.0), 0.0), (c(2.0, 3.0), 0.8), (c(10.0, -5.0), 2.5)] {
        let e32 = lame_error(32, lambda, xi);
        let e64 = lame_error(64, lambda, xi);
        assert!(e64 <= 1e-8, "{lambda} {xi}: {e64:e}");
        assert!(e64 * 10.0 <= e32 || e64 < 1e-13, "{lambda} {xi}: {e32:e} -> {e64:e}");
    }
}

fn gaussian_boundary(tg: &TangentialGrid, shift: f64) -> BoundaryField {
    BoundaryField::from_fn(tg, 1, |x| vec![c((-(x[0] - shift).powi(2)).exp(), 0.0)])
}

#[test]
fn volevich_trace_matches_direct_form() {
    let model = Model::baseline();
    let tg = TangentialGrid::line(32, 8.0).unwrap();
    let grid = Arc::new(NormalGrid::mapped(64, 40.0, 4.0).unwrap());
    let k = gaussian_boundary(&tg, 0.5);
    for &lambda in &[c(2.0, 0.0), c(3.0, 4.0)] {
        let ext = extend_boundary(&k, &grid).unwrap();
        let vol = solve_surface_volevich(&ext, &model, lambda).unwrap();
        let (u, h) = solve_surface_homogeneous(&k, &grid, &model, lambda).unwrap();
        let (tv, td) = (vol.u.trace(), u.trace());
        let scale = td.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let du = tv.data.iter().zip(&td.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(du <= 1e-6 * scale, "{du:e}");
        let hv = vol.h.trace();
        let hs = h.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let dh = hv.data.iter().zip(&h.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(dh <= 1e-6 * hs, "{dh:e}");
    }
}

fn random_data(tg: &TangentialGrid, grid: &Arc<NormalGrid>, seed: u64) -> ResolventData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bump = || {
        let (x0, y0, w, a) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.5..3.0), rng.gen_range(0.5..1.5), rng.gen_range(-1.0..1.0));
        move |x: f64, y: f64| c(a * (-((x - x0).powi(2) + (y - y0).powi(2)) / (w * w)).exp(), 0.0)
    };
    let (b1, b2, b3) = (bump(), bump(), bump());
    let (b4, b5, b6) = (bump(), bump(), bump());
    ResolventData {
        d: HalfSpaceField::from_fn(tg, grid, 1, |x, y| vec![b1(x[0], y)]),
        f: HalfSpaceField::from_fn(tg, grid, 2, |x, y| vec![b2(x[0], y), b3(x[0], y)]),
        g: BoundaryField::from_fn(tg, 2, |x| vec![b4(x[0], 0.0), b5(x[0], 0.0)]),
        k: BoundaryField::from_fn(tg, 1, |x| vec![b6(x[0], 0.0)]),
    }
}

#[test]
fn kinematic_identity_per_mode() {
    let model = Model::baseline();
    let tg = TangentialGrid::line(32, 8.0).unwrap();
    let grid = Arc::new(NormalGrid::mapped(64, 40.0, 4.0).unwrap());
    let data = random_data(&tg, &grid, 1);
    let lambda = c(2.0, 1.5);
    let (u, h) = solve_reduced_resolvent(&data.f, &data.g, &data.k, &model, lambda).unwrap();
    let k = data.k.to_spectral().unwrap();
    for m in 0..tg.mode_count() {
        let r = lambda * h.data[m] + u.at(m, 0, 1) - k.data[m];
        assert!(r.norm() <= 1e-10 * k.data.iter().map(|z| z.norm()).fold(0.0, f64::max), "mode {m}: {r}");
    }
}

#[test]
fn full_resolvent_is_linear() {
    let model = Model::baseline();
    let tg = TangentialGrid::line(32, 8.0).unwrap();
    let grid = Arc::new(NormalGrid::mapped(48, 40.0, 4.0).unwrap());
    let (x, y) = (random_data(&tg, &grid, 2), random_data(&tg, &grid, 3));
    let (a, b) = (c(0.6, -1.3), c(2.0, 0.25));
    let lambda = c(4.0, 0.0);
    let sx = solve_full_resolvent(&x, &model, lambda).unwrap();
    let sy = solve_full_resolvent(&y, &model, lambda).unwrap();
    let sc = solve_full_resolvent(&x.combine(a, &y, b).unwrap(), &model, lambda).unwrap();
    let pairs = [(&sc.u, sx.u.scaled(a).axpy(b, &sy.u).unwrap()), (&sc.eta, sx.eta.scaled(a).axpy(b, &sy.eta).unwrap())];
    for (got, want) in pairs {
        let scale = want.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = got.data.iter().zip(&want.data).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * scale, "{err:e}");
    }
    let hw = sx.h.scaled(a).axpy(b, &sy.h).unwrap();
    let err = sc.h.data.iter().zip(&hw.data).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    assert!(err <= 1e-12 * hw.data.iter().map(|z| z.norm()).fold(0.0, f64::max));
}

/// |∫e^{−x²}e^{−iξx}dx| = √π·e^{−ξ²/4}.
#[test]
fn gaussian_transform_magnitude() {
    let tg = TangentialGrid::line(128, 10.0).unwrap();
    let f = gaussian_boundary(&tg, 0.0).to_spectral().unwrap();
    for m in 0..tg.mode_count() {
        let xi = tg.frequency(m)[0];
        let want = std::f64::consts::PI.sqrt() * (-xi * xi / 4.0).exp();
        assert!((f.data[m].norm() - want).abs() < 1e-12, "{xi}");
    }
}
