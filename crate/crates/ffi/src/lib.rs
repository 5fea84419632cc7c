//! C ABI for resolvent-lab.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free`. Every function returns an `int32_t` status; on failure
//! `rl_last_error` yields the message for the calling thread. Complex arrays
//! are interleaved (re, im) doubles in the layout of the Rust fields:
//! tangential point slowest, then normal node, then component.

use num_complex::Complex64;
use resolvent_lab::cli::{run, Cli, Command};
use resolvent_lab::grid::{BoundaryField, HalfSpaceField, NormalGrid, TangentialGrid};
use resolvent_lab::halfspace::{solve_full_resolvent, ResolventData, ResolventSolution};
use resolvent_lab::io::RunConfig;
use resolvent_lab::params::Model;
use resolvent_lab::symbols::{nab_lower_bound_scan, SamplePlan};
use resolvent_lab::verification::pde_residual;
use resolvent_lab::LabError;
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;

pub const RL_OK: i32 = 0;
pub const RL_NULL_POINTER: i32 = 1;
pub const RL_INVALID_PARAMETER: i32 = 2;
pub const RL_OUTSIDE_REGION: i32 = 3;
pub const RL_DEGENERATE_CASE: i32 = 4;
pub const RL_BRANCH: i32 = 5;
pub const RL_NEAR_SINGULAR: i32 = 6;
pub const RL_SINGULAR_SYSTEM: i32 = 7;
pub const RL_SHAPE_MISMATCH: i32 = 8;
pub const RL_SEARCH_FAILED: i32 = 9;
pub const RL_QUADRATURE: i32 = 10;
pub const RL_DIVERGENCE: i32 = 11;
pub const RL_OUT_OF_DOMAIN: i32 = 12;
pub const RL_CONFIG: i32 = 13;
pub const RL_IO: i32 = 14;
pub const RL_BUFFER_TOO_SMALL: i32 = 15;
pub const RL_INVALID_UTF8: i32 = 16;
pub const RL_PANIC: i32 = 99;

/// Model parameters and admissible region.
pub struct RlModel(Model);

/// Solution of one resolvent problem, in physical space.
pub struct RlSolution {
    sol: ResolventSolution,
    nodes: Vec<f64>,
    max_residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn code(e: &LabError) -> i32 {
    match e {
        LabError::InvalidParameter(_) => RL_INVALID_PARAMETER,
        LabError::OutsideRegion { .. } => RL_OUTSIDE_REGION,
        LabError::DegenerateCase(_) => RL_DEGENERATE_CASE,
        LabError::Branch(_) => RL_BRANCH,
        LabError::NearSingular(_) => RL_NEAR_SINGULAR,
        LabError::SingularSystem(_) => RL_SINGULAR_SYSTEM,
        LabError::ShapeMismatch(_) => RL_SHAPE_MISMATCH,
        LabError::SearchFailed(_) => RL_SEARCH_FAILED,
        LabError::Quadrature { .. } => RL_QUADRATURE,
        LabError::Divergence { .. } => RL_DIVERGENCE,
        LabError::OutOfDomain(_) => RL_OUT_OF_DOMAIN,
        LabError::Config(_) => RL_CONFIG,
        LabError::Io(_) => RL_IO,
    }
}

struct Fail(i32, String);

impl From<LabError> for Fail {
    fn from(e: LabError) -> Self {
        Fail(code(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RL_NULL_POINTER, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            RL_OK
        }
        Ok(Err(Fail(c, msg))) => {
            set_error(msg);
            c
        }
        Err(_) => {
            set_error("internal panic".into());
            RL_PANIC
        }
    }
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(RL_INVALID_UTF8, format!("{what} is not UTF-8")))
}

unsafe fn complex_in(p: *const f64, len: usize) -> Option<Vec<Complex64>> {
    if p.is_null() {
        return None;
    }
    let s = std::slice::from_raw_parts(p, 2 * len);
    Some(s.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

unsafe fn complex_out(data: &[Complex64], out: *mut f64, len: usize) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < 2 * data.len() {
        return Err(Fail(RL_BUFFER_TOO_SMALL, format!("buffer holds {len} doubles, {} needed", 2 * data.len())));
    }
    let s = std::slice::from_raw_parts_mut(out, 2 * data.len());
    for (c, z) in s.chunks_exact_mut(2).zip(data) {
        c[0] = z.re;
        c[1] = z.im;
    }
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rl_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Baseline model: μ = ν = σ = m = γ₁ = γ₃ = 1, ζ = 0, ε = π/4, λ0 = 1.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_model_baseline(out: *mut *mut RlModel) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(RlModel(Model::baseline())));
        Ok(())
    })
}

/// Model from TOML text with `[fluid]` and `[sector]` blocks, as in a run config.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_model_from_toml(toml: *const c_char, out: *mut *mut RlModel) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = RunConfig::parse(string(toml, "toml")?)?.model()?;
        *out = Box::into_raw(Box::new(RlModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `rl_model_*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_model_free(model: *mut RlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Writes 1 to `inside` when λ lies in the model's admissible region, else 0.
///
/// # Safety
/// `model` must be a live handle and `inside` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_model_contains(model: *const RlModel, re: f64, im: f64, inside: *mut i32) -> i32 {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if inside.is_null() {
            return Err(null("inside"));
        }
        *inside = m.0.contains(Complex64::new(re, im)) as i32;
        Ok(())
    })
}

/// Randomized lower-bound scan of |N(A,B)|.
///
/// # Safety
/// `model` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_scan_nab(
    model: *const RlModel,
    samples: usize,
    seed: u64,
    lambda0: *mut f64,
    c: *mut f64,
    violations: *mut usize,
) -> i32 {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if lambda0.is_null() || c.is_null() || violations.is_null() {
            return Err(null("output"));
        }
        let r = nab_lower_bound_scan(&m.0, &SamplePlan::new(samples, seed))?;
        (*lambda0, *c, *violations) = (r.lambda0_found, r.c_found, r.violation_count);
        Ok(())
    })
}

/// Solves the full resolvent problem on a 2-D grid with `nt` tangential
/// points on [−half_length, half_length) and `nn` normal nodes.
///
/// Data are physical values; a null pointer means zero data. Lengths in
/// complex entries: d nt·nn, f nt·nn·2, g nt·2, k nt.
///
/// # Safety
/// Non-null data pointers must hold the stated number of (re, im) pairs;
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_solve(
    model: *const RlModel,
    lambda_re: f64,
    lambda_im: f64,
    nt: usize,
    half_length: f64,
    nn: usize,
    d: *const f64,
    f: *const f64,
    g: *const f64,
    k: *const f64,
    out: *mut *mut RlSolution,
) -> i32 {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let tg = TangentialGrid::line(nt, half_length)?;
        let grid = Arc::new(NormalGrid::for_model(m, nn)?);
        let mut data = ResolventData::zeros(&tg, &grid);
        let fill = |f: &mut HalfSpaceField, p: *const f64| {
            if let Some(v) = complex_in(p, f.data.len()) {
                f.data = v;
            }
        };
        fill(&mut data.d, d);
        fill(&mut data.f, f);
        let fill = |b: &mut BoundaryField, p: *const f64| {
            if let Some(v) = complex_in(p, b.data.len()) {
                b.data = v;
            }
        };
        fill(&mut data.g, g);
        fill(&mut data.k, k);
        let lambda = Complex64::new(lambda_re, lambda_im);
        let sol = solve_full_resolvent(&data, m, lambda)?;
        let max_residual = pde_residual(&sol, &data, m, lambda)?.max_relative;
        let sol = sol.to_physical()?;
        *out = Box::into_raw(Box::new(RlSolution { sol, nodes: grid.nodes.clone(), max_residual }));
        Ok(())
    })
}

/// # Safety
/// `sol` must come from `rl_solve` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_solution_free(sol: *mut RlSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Grid sizes and the largest relative residual over all equations.
///
/// # Safety
/// `sol` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_solution_info(sol: *const RlSolution, nt: *mut usize, nn: *mut usize, max_residual: *mut f64) -> i32 {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        if nt.is_null() || nn.is_null() || max_residual.is_null() {
            return Err(null("output"));
        }
        (*nt, *nn, *max_residual) = (s.sol.h.data.len(), s.nodes.len(), s.max_residual);
        Ok(())
    })
}

/// Normal collocation nodes (`nn` doubles).
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_solution_nodes(sol: *const RlSolution, out: *mut f64, len: usize) -> i32 {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        if len < s.nodes.len() {
            return Err(Fail(RL_BUFFER_TOO_SMALL, format!("{} doubles needed", s.nodes.len())));
        }
        std::ptr::copy_nonoverlapping(s.nodes.as_ptr(), out, s.nodes.len());
        Ok(())
    })
}

/// Velocity, nt·nn·2 complex entries; `len` counts doubles.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_solution_velocity(sol: *const RlSolution, out: *mut f64, len: usize) -> i32 {
    guard(|| complex_out(&sol.as_ref().ok_or_else(|| null("solution"))?.sol.u.data, out, len))
}

/// Density, nt·nn complex entries; `len` counts doubles.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_solution_density(sol: *const RlSolution, out: *mut f64, len: usize) -> i32 {
    guard(|| complex_out(&sol.as_ref().ok_or_else(|| null("solution"))?.sol.eta.data, out, len))
}

/// Surface height, nt complex entries; `len` counts doubles.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_solution_height(sol: *const RlSolution, out: *mut f64, len: usize) -> i32 {
    guard(|| complex_out(&sol.as_ref().ok_or_else(|| null("solution"))?.sol.h.data, out, len))
}

/// Runs a batch command as the command-line tool would and stores its exit
/// status (0, 2, 3 or 4) in `exit_code`. `out_dir` may be null.
///
/// # Safety
/// Strings must be NUL-terminated; `exit_code` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_run_command(
    command: *const c_char,
    config_path: *const c_char,
    out_dir: *const c_char,
    exit_code: *mut i32,
) -> i32 {
    guard(|| {
        if exit_code.is_null() {
            return Err(null("exit_code"));
        }
        let name = string(command, "command")?;
        let command = match name {
            "solve" => Command::Solve,
            "verify-symbols" => Command::VerifySymbols,
            "scan-nab" => Command::ScanNab,
            "rbound" => Command::Rbound,
            "evolve" => Command::Evolve,
            "bent" => Command::Bent,
            other => return Err(Fail(RL_INVALID_PARAMETER, format!("unknown command `{other}`"))),
        };
        let out = if out_dir.is_null() { None } else { Some(PathBuf::from(string(out_dir, "out_dir")?)) };
        let cli = Cli {
            command,
            config: PathBuf::from(string(config_path, "config_path")?),
            out,
            seed: None,
            threads: None,
            tol_override: vec![],
        };
        *exit_code = run(&cli);
        Ok(())
    })
}
