use serde::Serialize;
use serde_json::{json, Map, Value};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{LabError, Result};

/// One pass/fail check with the measured value and its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// "le", "lt", "ge" or "gt": how `value` is compared with `bound`.
    pub relation: String,
    pub pass: bool,
}

impl Verdict {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self::make(name, value, bound, "le", value <= bound)
    }

    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        Self::make(name, value, bound, "lt", value < bound)
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self::make(name, value, bound, "ge", value >= bound)
    }

    pub fn above(name: &str, value: f64, bound: f64) -> Self {
        Self::make(name, value, bound, "gt", value > bound)
    }

    fn make(name: &str, value: f64, bound: f64, relation: &str, pass: bool) -> Self {
        // NaN never passes
        Verdict { name: name.into(), value, bound, relation: relation.into(), pass: pass && !value.is_nan() }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub config_hash: String,
    pub git_describe: String,
    pub wall_time: f64,
    pub verdicts: Vec<Verdict>,
    pub results: Value,
    /// Machine-readable failure, if the command did not complete.
    pub error: Option<Value>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "configHash": self.config_hash,
            "gitDescribe": self.git_describe,
            "wallTime": self.wall_time,
            "verdicts": self.verdicts.iter().map(|v| serde_json::to_value(v).unwrap_or(Value::Null)).collect::<Vec<_>>(),
            "pass": self.passed(),
            "results": self.results,
            "error": self.error.clone().unwrap_or(Value::Null),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, to_json_17(&self.to_value())).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))
    }
}

/// Pretty JSON with every non-integer number printed to 17 significant digits.
pub fn to_json_17(v: &Value) -> String {
    let mut out = String::new();
    emit(v, 0, &mut out);
    out.push('\n');
    out
}

fn emit(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap_or(f64::NAN);
                let _ = write!(out, "{x:.16e}");
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                emit(x, depth + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => emit_object(m, depth, out),
        other => out.push_str(&other.to_string()),
    }
}

fn emit_object(m: &Map<String, Value>, depth: usize, out: &mut String) {
    out.push_str("{\n");
    for (i, (k, x)) in m.iter().enumerate() {
        out.push_str(&"  ".repeat(depth + 1));
        out.push_str(&Value::String(k.clone()).to_string());
        out.push_str(": ");
        emit(x, depth + 1, out);
        out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
    }
    out.push_str(&"  ".repeat(depth));
    out.push('}');
}

/// `git describe --always --dirty`, or "unknown" outside a work tree.
pub fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

/// Error object stored in the report.
pub fn error_value(e: &LabError, exit_code: i32) -> Value {
    let kind = format!("{e:?}");
    let kind = kind.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("").to_string();
    let mut v = json!({ "kind": kind, "message": e.to_string(), "exitCode": exit_code });
    if let LabError::Divergence { ratio } = e {
        v["ratio"] = json!(ratio);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_17_digits_and_parse_back() {
        let v = json!({ "a": 0.1, "b": [1.0 / 3.0, 2], "c": "x" });
        let text = to_json_17(&v);
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("3.3333333333333331e-1"));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"].as_f64().unwrap().to_bits(), 0.1f64.to_bits());
        assert_eq!(back["b"][1], 2);
    }

    #[test]
    fn nan_fails_every_relation() {
        assert!(!Verdict::at_most("x", f64::NAN, 1.0).pass);
        assert!(!Verdict::at_least("x", f64::NAN, 1.0).pass);
        assert!(Verdict::below("x", 0.4, 0.5).pass);
        assert!(!Verdict::above("x", 0.5, 0.5).pass);
    }

    #[test]
    fn error_object_names_the_variant() {
        let v = error_value(&LabError::Divergence { ratio: 1.5 }, 3);
        assert_eq!(v["kind"], "Divergence");
        assert_eq!(v["exitCode"], 3);
        assert_eq!(v["ratio"].as_f64().unwrap(), 1.5);
    }

    proptest::proptest! {
        #[test]
        fn every_finite_float_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let back: Value = serde_json::from_str(&to_json_17(&json!({ "x": x }))).unwrap();
            proptest::prop_assert_eq!(back["x"].as_f64().unwrap().to_bits(), x.to_bits());
        }
    }
}
