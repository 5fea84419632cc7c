use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

const SECTOR: &str = r#"
[sector]
epsilon = 0.7853981633974483
lambda0 = 1.0
zeta_case = "C3"
nu_over_rho = 1.0
"#;

const SMALL_GRID: &str = r#"
[grid]
tangential_points = 16
half_length = 6.0
normal_nodes = 64
"#;

fn config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(command: &str, cfg: &Path, out: &Path, extra: &[&str]) -> (i32, Value) {
    let status = Command::new(env!("CARGO_BIN_EXE_resolvent-lab"))
        .arg(command)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    let text = std::fs::read_to_string(out.join("report.json")).unwrap();
    (status.status.code().unwrap(), serde_json::from_str(&text).unwrap())
}

#[test]
fn example_config_is_valid() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/baseline.toml");
    let c = resolvent_lab::io::RunConfig::load(&path).unwrap();
    c.model().unwrap();
    c.tolerances().unwrap();
    assert!(c.seed.is_some() && c.solve.is_some() && c.scan.is_some() && c.contour.is_some());
    assert!(c.bent.is_some() && c.rbound.is_some());
}

#[test]
fn zero_data_solves_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", &format!("{SECTOR}{SMALL_GRID}[solve]\ndata = \"zero\"\n"));
    let (code, r) = run("solve", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["pass"], true);
    for row in r["results"]["residuals"].as_array().unwrap() {
        assert_eq!(row["absolute"].as_f64().unwrap(), 0.0);
    }
    assert!(dir.path().join("out/u.bin").exists() && dir.path().join("out/residual.csv").exists());
}

#[test]
fn scan_nab_finds_the_baseline_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", &format!("seed = 3\n{SECTOR}[scan]\nsamples = 20000\n"));
    let (code, r) = run("scan-nab", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code, 0, "{r}");
    let res = &r["results"];
    assert!(res["lambda0Found"].as_f64().unwrap() >= 1.0);
    assert!(res["cFound"].as_f64().unwrap() > 0.0);
    assert_eq!(res["violations"], 0);
}

#[test]
fn missing_sector_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", "seed = 1\n[solve]\ndata = \"zero\"\n");
    let (code, r) = run("solve", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["kind"], "Config");
    assert_eq!(r["error"]["exitCode"], 2);
    assert_eq!(r["pass"], false);
}

#[test]
fn randomized_commands_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", &format!("{SECTOR}[scan]\nsamples = 100\n"));
    assert_eq!(run("scan-nab", &cfg, &dir.path().join("a"), &[]).0, 2);
    assert_eq!(run("scan-nab", &cfg, &dir.path().join("b"), &["--seed", "4"]).0, 0);
}

#[test]
fn unknown_tolerance_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", &format!("{SECTOR}{SMALL_GRID}[solve]\ndata = \"zero\"\n"));
    let (code, _) = run("solve", &cfg, &dir.path().join("out"), &["--tol-override", "solve.nonsense=1"]);
    assert_eq!(code, 2);
}

#[test]
fn failed_verdict_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", &format!("seed = 5\n{SECTOR}{SMALL_GRID}"));
    let (code, r) = run("solve", &cfg, &dir.path().join("out"), &["--tol-override", "solve.residual=0"]);
    assert_eq!(code, 4, "{r}");
    assert!(r["error"].is_null());
    assert!(r["verdicts"].as_array().unwrap().iter().any(|v| v["pass"] == false));
}

#[test]
fn steep_bump_reports_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "seed = 2\n{SECTOR}[grid]\ntangential_points = 32\nhalf_length = 8.0\nnormal_nodes = 32\nx_max = 40.0\nell = 4.0\n[bent]\namplitude = 0.8\n"
    );
    let cfg = config(dir.path(), "c.toml", &text);
    let (code, r) = run("bent", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code, 3, "{r}");
    assert_eq!(r["error"]["kind"], "Divergence");
    assert!(r["error"]["ratio"].as_f64().unwrap() >= 1.0);
}

#[test]
fn reports_are_deterministic_apart_from_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", &format!("seed = 9\n{SECTOR}{SMALL_GRID}"));
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("wallTime");
        v
    };
    let (a, ra) = run("solve", &cfg, &dir.path().join("a"), &["--threads", "1"]);
    let (b, rb) = run("solve", &cfg, &dir.path().join("b"), &["--threads", "2"]);
    assert_eq!((a, b), (0, 0));
    assert_eq!(strip(ra), strip(rb));
    let bytes = |d: &str| std::fs::read(dir.path().join(d).join("u.bin")).unwrap();
    assert_eq!(bytes("a"), bytes("b"));
}
