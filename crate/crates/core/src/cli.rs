//! Batch front end: `resolvent-lab <command> --config run.toml`.
//!
//! Every run writes `report.json` into the output directory. Exit status is
//! 0 when all verdicts pass, 2 on configuration errors, 3 on numerical
//! failures and 4 when a verdict fails.

use clap::{Parser, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::bent::{self, contraction_proxy, neumann_solve, DiffeoSpec, NeumannOptions};
use crate::error::{LabError, Result};
use crate::evolution::{build_generator, matrix_exponential_oracle, propagate_contour, write_time_series_csv, ContourSpec, TimeSample};
use crate::grid::{BoundaryField, HalfSpaceField, NormalGrid, TangentialGrid};
use crate::halfspace::{density_model, solve_full_resolvent, ResolventData};
use crate::io::{self, DataKind, Report, RunConfig, Verdict};
use crate::params::{Model, ZetaCase};
use crate::symbols::{
    form_identity_scan, multiplier_class_scan_many, nab_lower_bound_scan, removable_singularity_gap, sector_scan, SamplePlan,
    SymbolKind,
};
use crate::verification::{measured_operator_norm, pde_residual, rbound_estimate, resolvent_operator, Operator, RBoundSpec};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERDICT: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Solve,
    VerifySymbols,
    ScanNab,
    Rbound,
    Evolve,
    Bent,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::VerifySymbols => "verify-symbols",
            Command::ScanNab => "scan-nab",
            Command::Rbound => "rbound",
            Command::Evolve => "evolve",
            Command::Bent => "bent",
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "resolvent-lab", version, about = "Spectral resolvent solver and verification runs")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the hardware parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol-override", value_name = "KEY=VAL")]
    pub tol_override: Vec<String>,
}

fn exit_code(e: &LabError) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let start = Instant::now();
    let loaded = RunConfig::load(&cli.config).and_then(|mut c| {
        c.apply_overrides(&cli.tol_override)?;
        if cli.seed.is_some() {
            c.seed = cli.seed;
        }
        Ok(c)
    });
    let out = cli
        .out
        .clone()
        .or_else(|| loaded.as_ref().ok().and_then(|c| c.out.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("cannot create {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    let hash = loaded.as_ref().ok().and_then(|c| c.hash().ok()).unwrap_or_default();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build();
    let outcome = match (&loaded, pool) {
        (Err(e), _) => Err(e.clone()),
        (_, Err(e)) => Err(LabError::Config(format!("thread pool: {e}"))),
        (Ok(cfg), Ok(pool)) => pool.install(|| execute(cli.command, cfg, &out)),
    };
    let mut report = Report {
        command: cli.command.name().into(),
        config_hash: hash,
        git_describe: io::git_describe(),
        wall_time: 0.0,
        verdicts: vec![],
        results: Value::Null,
        error: None,
    };
    let code = match outcome {
        Ok((verdicts, results)) => {
            report.verdicts = verdicts;
            report.results = results;
            if report.passed() {
                0
            } else {
                EXIT_VERDICT
            }
        }
        Err(e) => {
            let code = exit_code(&e);
            report.error = Some(io::error_value(&e, code));
            eprintln!("{}: {e}", cli.command.name());
            code
        }
    };
    report.wall_time = start.elapsed().as_secs_f64();
    if let Err(e) = report.write(&out.join("report.json")) {
        eprintln!("{e}");
        return EXIT_CONFIG;
    }
    for v in &report.verdicts {
        println!("{} {} {:.6e} {} {:.6e}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.value, v.relation, v.bound);
    }
    code
}

type Outcome = Result<(Vec<Verdict>, Value)>;

pub fn execute(command: Command, cfg: &RunConfig, out: &Path) -> Outcome {
    let tol = cfg.tolerances()?;
    let t = |k: &str| tol[k];
    let model = cfg.model()?;
    match command {
        Command::Solve => solve(cfg, &model, out, &t),
        Command::VerifySymbols => verify_symbols(cfg, &model, out, &t),
        Command::ScanNab => scan_nab(cfg, &model, out, &t),
        Command::Rbound => rbound(cfg, &model, &t),
        Command::Evolve => evolve(cfg, &model, out, &t),
        Command::Bent => bent_run(cfg, &model, out, &t),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))
}

fn csv_err(e: csv::Error) -> LabError {
    LabError::Io(e.to_string())
}

fn gaussian(rng: &mut ChaCha8Rng) -> impl Fn(f64, f64) -> Complex64 {
    let (x0, y0, w) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.5..3.0), rng.gen_range(0.5..1.5));
    let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    move |x: f64, y: f64| a * (-((x - x0).powi(2) + (y - y0).powi(2)) / (w * w)).exp()
}

fn solve(cfg: &RunConfig, model: &Model, out: &Path, t: &dyn Fn(&str) -> f64) -> Outcome {
    let sc = cfg.solve.clone().unwrap_or_default();
    let tg = cfg.tangential()?;
    let ng = Arc::new(cfg.normal(model)?);
    let mut data = ResolventData::zeros(&tg, &ng);
    if sc.data == DataKind::Gaussian {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.require_seed()?);
        let b: Vec<_> = (0..6).map(|_| gaussian(&mut rng)).collect();
        data.d = HalfSpaceField::from_fn(&tg, &ng, 1, |x, y| vec![b[0](x[0], y)]);
        data.f = HalfSpaceField::from_fn(&tg, &ng, 2, |x, y| vec![b[1](x[0], y), b[2](x[0], y)]);
        data.g = BoundaryField::from_fn(&tg, 2, |x| vec![b[3](x[0], 0.0), b[4](x[0], 0.0)]);
        data.k = BoundaryField::from_fn(&tg, 1, |x| vec![b[5](x[0], 0.0)]);
    }
    let lambda = sc.lambda;
    let sol = solve_full_resolvent(&data, model, lambda)?;
    let res = pde_residual(&sol, &data, model, lambda)?;

    // relative to the largest term of the identity, so small data k stays meaningful
    let k = data.k.to_spectral()?;
    let (mut kin, mut scale): (f64, f64) = (0.0, 0.0);
    for m in 0..tg.mode_count() {
        let (lh, un) = (lambda * sol.h.data[m], sol.u.at(m, 0, 1));
        kin = kin.max((lh + un - k.data[m]).norm());
        scale = scale.max(lh.norm()).max(un.norm()).max(k.data[m].norm());
    }
    let kin = if scale > 0.0 { kin / scale } else { kin };

    let mut w = csv_writer(&out.join("residual.csv"))?;
    w.write_record(["row", "absolute", "relative", "worstMode"]).map_err(csv_err)?;
    for r in &res.rows {
        w.write_record([r.name.clone(), format!("{:.16e}", r.absolute), format!("{:.16e}", r.relative), r.worst_mode.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    if sc.dump {
        io::write_field(out, "u", &sol.u)?;
        io::write_field(out, "eta", &sol.eta)?;
        io::write_boundary(out, "h", &sol.h)?;
    }
    let verdicts = vec![
        Verdict::at_most("solve.residual", res.max_relative, t("solve.residual")),
        Verdict::at_most("solve.kinematic", kin, t("solve.kinematic")),
    ];
    let rows: Vec<Value> = res.rows.iter().map(|r| json!({"row": r.name, "absolute": r.absolute, "relative": r.relative})).collect();
    let results = json!({
        "lambda": [lambda.re, lambda.im],
        "tangentialPoints": tg.points,
        "normalNodes": ng.len(),
        "xMax": ng.x_max,
        "residuals": rows,
        "maxRelativeResidual": res.max_relative,
        "kinematicRelative": kin,
    });
    Ok((verdicts, results))
}

fn plan(cfg: &RunConfig, count: usize, seed: u64) -> SamplePlan {
    let sc = cfg.scan.clone().unwrap_or_default();
    SamplePlan { lambda_span: sc.lambda_span, xi_min: sc.xi_min, xi_max: sc.xi_max, ..SamplePlan::new(count, seed) }
}

fn verify_symbols(cfg: &RunConfig, model: &Model, out: &Path, t: &dyn Fn(&str) -> f64) -> Outcome {
    let sc = cfg.scan.clone().ok_or_else(|| LabError::Config("verify-symbols needs a [scan] block".into()))?;
    let seed = cfg.require_seed()?;
    let form = form_identity_scan(model, &plan(cfg, sc.identity_samples, seed))?;
    let sector = sector_scan(model, &plan(cfg, sc.samples, seed.wrapping_add(1)))?;

    let mut taylor: f64 = 0.0;
    for (k, &x) in [0.1, 1.0, 5.0].iter().enumerate() {
        for j in 0..8 {
            let a = Complex64::from_polar(0.5 + j as f64, (j as f64 - 3.5) * 0.35 + 0.1 * k as f64);
            taylor = taylor.max(removable_singularity_gap(a, 1e-8, x));
        }
    }

    let kinds = SymbolKind::all(1);
    let classes: Vec<(f64, u8)> = kinds.iter().map(|k| k.default_class()).collect();
    let coarse_plan = plan(cfg, sc.multiplier_samples, seed.wrapping_add(2));
    let coarse = multiplier_class_scan_many(model, &kinds, &classes, sc.max_deriv_order, &coarse_plan)?;
    let fine = multiplier_class_scan_many(model, &kinds, &classes, sc.max_deriv_order, &coarse_plan.refined(2))?;
    let mut growth: f64 = 0.0;
    let mut finite = true;
    let mut w = csv_writer(&out.join("multiplier.csv"))?;
    w.write_record(["symbol", "worst", "worstRefined", "growth"]).map_err(csv_err)?;
    let mut rows = vec![];
    for (c, f) in coarse.iter().zip(&fine) {
        let wc = c.per_derivative.iter().map(|d| d.worst_ratio).fold(0.0, f64::max);
        let wf = f.per_derivative.iter().map(|d| d.worst_ratio).fold(0.0, f64::max);
        let g = if wc > 0.0 { wf / wc - 1.0 } else { 0.0 };
        finite &= wc.is_finite() && wf.is_finite();
        growth = growth.max(g);
        w.write_record([c.symbol.clone(), format!("{wc:.16e}"), format!("{wf:.16e}"), format!("{g:.16e}")]).map_err(csv_err)?;
        rows.push(json!({"symbol": c.symbol, "worst": wc, "worstRefined": wf, "growth": g}));
    }
    w.flush()?;
    let gap = form.max_form_gap.max(form.max_det_gap).max(form.max_n_ptilde_gap).max(form.max_n_e_gap);
    let verdicts = vec![
        Verdict::at_most("symbols.form_identity", gap, t("symbols.form_identity")),
        Verdict::at_most("symbols.basic_violations", sector.basic_violations as f64, 0.0),
        Verdict::above("symbols.ab_sector_eps0", sector.ab_sector_eps0, 0.0),
        Verdict::at_most("symbols.taylor", taylor, t("symbols.taylor")),
        Verdict::below("symbols.refinement_growth", if finite { growth } else { f64::NAN }, t("symbols.refinement_growth")),
    ];
    let results = json!({
        "formIdentity": {
            "samples": form.samples,
            "maxFormGap": form.max_form_gap,
            "maxDetGap": form.max_det_gap,
            "maxNPTildeGap": form.max_n_ptilde_gap,
            "maxNEGap": form.max_n_e_gap,
        },
        "sector": {
            "samples": sector.samples,
            "basicViolations": sector.basic_violations,
            "abSectorEps0": sector.ab_sector_eps0,
            "intAbC": sector.int_ab_c,
        },
        "taylorGap": taylor,
        "multiplier": rows,
    });
    Ok((verdicts, results))
}

fn scan_nab(cfg: &RunConfig, model: &Model, out: &Path, t: &dyn Fn(&str) -> f64) -> Outcome {
    let sc = cfg.scan.clone().ok_or_else(|| LabError::Config("scan-nab needs a [scan] block".into()))?;
    let r = nab_lower_bound_scan(model, &plan(cfg, sc.samples, cfg.require_seed()?))?;
    let mut w = csv_writer(&out.join("nab_violations.csv"))?;
    w.write_record(["lambdaRe", "lambdaIm", "xi", "ratio"]).map_err(csv_err)?;
    for v in &r.violations {
        w.write_record([v.lambda.re, v.lambda.im, v.xi, v.ratio].map(|x| format!("{x:.16e}"))).map_err(csv_err)?;
    }
    w.flush()?;
    let verdicts = vec![
        Verdict::at_most("nab.lambda0", r.lambda0_found, t("nab.lambda0_max")),
        Verdict::at_most("nab.violations", r.violation_count as f64, 0.0),
        Verdict::above("nab.c", r.c_found, t("nab.c_min")),
    ];
    let results = json!({
        "lambda0Found": r.lambda0_found,
        "cFound": r.c_found,
        "minRatio": r.min_ratio,
        "samples": r.samples,
        "verificationSamples": r.verification_samples,
        "violations": r.violation_count,
        "floor": r.floor,
    });
    Ok((verdicts, results))
}

/// λ in the model's region: |λ| log-uniform in [λ0', 100λ0'], λ0' = max(λ0, 1).
fn sample_lambdas(model: &Model, count: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let base = model.sector.lambda0.max(1.0);
    let amax = PI - model.sector.epsilon;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let r = base * 100f64.powf(rng.gen_range(0.0..1.0));
        let l = Complex64::from_polar(r, rng.gen_range(-amax..amax));
        if model.contains(l) {
            out.push(l);
        }
    }
    out
}

fn rbound(cfg: &RunConfig, model: &Model, t: &dyn Fn(&str) -> f64) -> Outcome {
    let rc = cfg.rbound.clone().ok_or_else(|| LabError::Config("rbound needs an [rbound] block".into()))?;
    let seed = cfg.require_seed()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tg = TangentialGrid::line(rc.tangential_points, cfg.grid.half_length)?;
    let ng = Arc::new(NormalGrid::for_model(model, rc.normal_nodes)?);
    let lambdas = sample_lambdas(model, rc.lambdas.max(1), &mut rng);
    let (op, weights) = resolvent_operator(model, lambdas[0], 0.0, &tg, &ng);
    let n = weights.len();
    let tests: Vec<Vec<Complex64>> = (0..rc.test_vectors.max(1))
        .map(|_| (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let spec = RBoundSpec { q: rc.q, input_weights: weights.clone(), output_weights: weights };

    let single = rbound_estimate("singleton", &[(lambdas[0], op)], &tests, rc.trials, seed, &spec)?;
    let (op, _) = resolvent_operator(model, lambdas[0], 0.0, &tg, &ng);
    let norm = measured_operator_norm(&op, &tests, rc.trials, seed, &spec)?;
    let singleton_gap = (single.estimate - norm).abs() / norm.max(f64::MIN_POSITIVE);

    let scalar: Vec<(Complex64, Operator)> = lambdas
        .iter()
        .map(|&l| {
            let c = l.inv();
            let op: Operator = Box::new(move |f: &[Complex64]| Ok(f.iter().map(|z| z * c).collect()));
            (l, op)
        })
        .collect();
    let scalar_r = rbound_estimate("inverse", &scalar, &tests, rc.trials, seed, &spec)?;
    let l0 = lambdas.iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min);

    let family: Vec<(Complex64, Operator)> =
        lambdas.iter().map(|&l| (l, resolvent_operator(model, l, rc.power, &tg, &ng).0)).collect();
    let fam = rbound_estimate("resolvent", &family, &tests, rc.trials, seed, &spec)?;

    let verdicts = vec![
        Verdict::at_most("rbound.singleton", singleton_gap, t("rbound.singleton")),
        Verdict::at_most("rbound.scalar", scalar_r.estimate * l0 - 1.0, t("rbound.scalar")),
        Verdict::below("rbound.family_finite", fam.estimate, f64::MAX),
    ];
    let results = json!({
        "lambdas": lambdas.iter().map(|l| [l.re, l.im]).collect::<Vec<_>>(),
        "singletonEstimate": single.estimate,
        "operatorNorm": norm,
        "scalarEstimate": scalar_r.estimate,
        "scalarBound": 1.0 / l0,
        "familyEstimate": fam.estimate,
        "familyMaxSingle": fam.max_single_norm,
        "familyBand": [fam.band.0, fam.band.1],
        "power": rc.power,
        "trials": rc.trials,
        "q": rc.q,
    });
    Ok((verdicts, results))
}

fn rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let n = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt() / n
}

fn evolve(cfg: &RunConfig, model: &Model, out: &Path, t: &dyn Fn(&str) -> f64) -> Outcome {
    let cc = cfg.contour.clone().ok_or_else(|| LabError::Config("evolve needs a [contour] block".into()))?;
    if cc.times.is_empty() {
        return Err(LabError::Config("contour.times is empty".into()));
    }
    let seed = cfg.require_seed()?;
    // eliminating the density puts every mode generator in case C1
    let mut sector = density_model(model).sector;
    sector.zeta_case = ZetaCase::C1;
    sector.lambda0 = sector.lambda0.max(cc.lambda0);
    let x = cfg.grid.x_max.unwrap_or(40.0);
    let grid = Arc::new(NormalGrid::mapped(cc.generator_nodes, x, cfg.grid.ell.unwrap_or((x / 10.0).max(2.0)))?);
    let gen = build_generator(&[cc.xi], &model.fluid, &grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0: Vec<Complex64> = (0..gen.dim()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let prop = |s: f64, v: &[Complex64]| -> Result<Vec<Complex64>> {
        propagate_contour(&gen.matrix, v, s, &ContourSpec::hyperbolic(s, cc.nodes, &sector)?)
    };

    let mut worst: f64 = 0.0;
    let mut samples = vec![];
    for &s in &cc.times {
        let u = prop(s, &u0)?;
        let e = matrix_exponential_oracle(&gen.matrix, &u0, s)?;
        let err = rel(&u, &e);
        worst = worst.max(err);
        let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        samples.push(TimeSample { t: s, values: vec![err, norm] });
    }
    write_time_series_csv(&out.join("evolve.csv"), &["relErr", "stateNorm"], &samples)?;

    let (t1, t2) = (0.4, 0.7);
    let composition = rel(&prop(t2, &prop(t1, &u0)?)?, &prop(t1 + t2, &u0)?);

    let minus_one = DMatrix::from_element(1, 1, Complex64::new(-1.0, 0.0));
    let one = [Complex64::new(1.0, 0.0)];
    let mut scalar: f64 = 0.0;
    // spectrum {−1}: the model's own sector with δ = 0
    for &s in &cc.times {
        let c = ContourSpec::hyperbolic_with_angle(s, 32, &model.sector, 0.0)?;
        let v = propagate_contour(&minus_one, &one, s, &c)?;
        scalar = scalar.max((v[0] - (-s).exp()).norm());
    }
    let verdicts = vec![
        Verdict::at_most("evolve.contour", worst, t("evolve.contour")),
        Verdict::at_most("evolve.composition", composition, t("evolve.composition")),
        Verdict::at_most("evolve.scalar", scalar, t("evolve.scalar")),
    ];
    let results = json!({
        "dimension": gen.dim(),
        "xi": cc.xi,
        "nodes": cc.nodes,
        "lambda0": sector.lambda0,
        "times": cc.times,
        "relErrors": samples.iter().map(|s| s.values[0]).collect::<Vec<_>>(),
        "compositionError": composition,
        "scalarError": scalar,
    });
    Ok((verdicts, results))
}

fn bent_run(cfg: &RunConfig, model: &Model, out: &Path, t: &dyn Fn(&str) -> f64) -> Outcome {
    let bc = cfg.bent.clone().ok_or_else(|| LabError::Config("bent needs a [bent] block".into()))?;
    let seed = cfg.require_seed()?;
    let spec = DiffeoSpec { amplitude: bc.amplitude, width: bc.width };
    spec.validate().map_err(|e| LabError::Config(e.to_string()))?;
    let tg = cfg.tangential()?;
    let ng = Arc::new(cfg.normal(model)?);
    let data = bent::random_data(&tg, &ng, seed);
    let opts = NeumannOptions { max_iter: bc.max_iter, tol: bc.tol };
    let sol = neumann_solve(&data, &spec, model, bc.lambda, &opts)?;
    let proxy = contraction_proxy(&spec, model, bc.lambda, &tg, &ng, bc.probes, bc.power_steps, seed)?;
    let path = out.join("bent_history.csv");
    let file = std::fs::File::create(&path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    sol.state.write_history(file)?;
    io::write_field(out, "bent_v", &sol.v)?;
    io::write_boundary(out, "bent_h", &sol.h)?;

    let ratios = sol.state.ratios();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let last = sol.state.history.last().map_or(0.0, |r| r.update_norm);
    let rel_update = if sol.data_norm > 0.0 { last / sol.data_norm } else { 0.0 };
    let verdicts = vec![
        Verdict::at_most("bent.converged", rel_update, bc.tol),
        Verdict::below("bent.ratio", max_ratio, t("bent.ratio")),
        Verdict::at_most("bent.residual", sol.residual.max_relative, t("bent.residual")),
    ];
    let b = sol.bounds;
    let results = json!({
        "amplitude": bc.amplitude,
        "width": bc.width,
        "lambda": [bc.lambda.re, bc.lambda.im],
        "m1": b.m1,
        "m2": b.m2,
        "m3": b.m3,
        "iterations": sol.state.history.len(),
        "ratios": ratios,
        "asymptoticRatio": sol.state.asymptotic_ratio(sol.data_norm),
        "contractionProxy": proxy,
        "pullbackConstant": sol.pullback_constant,
        "residuals": sol.residual.rows.iter().map(|r| json!({"row": r.name, "absolute": r.absolute, "relative": r.relative})).collect::<Vec<_>>(),
        "maxRelativeResidual": sol.residual.max_relative,
    });
    Ok((verdicts, results))
}
