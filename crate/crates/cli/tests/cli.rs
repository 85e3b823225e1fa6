use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(format!("{name}.json"))
}

fn papm(args: &[&str]) -> Output {
    papm_env(args, None)
}

fn papm_env(args: &[&str], tol: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_papm"));
    cmd.args(args).env_remove("PAPM_TOL");
    if let Some(t) = tol {
        cmd.env("PAPM_TOL", t);
    }
    cmd.output().expect("papm runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const ODD: &str = r#"{"dimension": 3, "coordinates": ["x1", "x2", "x3"],
  "metric": [["1","0","0"],["0","1","0"],["0","0","1"]],
  "structure": [["1","0","0"],["0","1","0"],["0","0","-1"]],
  "points": [[0, 0, 0]]}"#;

// P² = I and compatible, but tr P = 1 ≠ 0.
const TRACE_ONE: &str = r#"{"dimension": 2, "coordinates": ["x1", "x2"],
  "metric": [["1","0"],["0","1"]],
  "structure": [["1","0"],["0","1"]],
  "points": [[0, 0]]}"#;

#[test]
fn validate_passes_on_a_fixture() {
    let o = papm(&["validate", s(&fixture("flat-product"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("validation passed"));
}

#[test]
fn validate_rejects_odd_dimension_as_format_error() {
    let dir = TempDir::new().unwrap();
    let o = papm(&["validate", s(&write(&dir, "odd.json", ODD))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("even-dimensional manifold"), "{}", stderr(&o));
}

#[test]
fn validate_reports_axiom_violations() {
    let dir = TempDir::new().unwrap();
    let o = papm(&["validate", s(&write(&dir, "trace.json", TRACE_ONE))]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("violation"), "{}", stdout(&o));
}

#[test]
fn missing_and_malformed_files_are_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.json");
    let junk = write(&dir, "junk.json", "{ not json");
    for cmd in ["validate", "classify", "report"] {
        assert_eq!(code(&papm(&[cmd, s(&missing)])), 2, "{cmd}");
        assert_eq!(code(&papm(&[cmd, s(&junk)])), 2, "{cmd}");
    }
}

#[test]
fn classify_prints_flags() {
    let o = papm(&["classify", s(&fixture("rotating-2d"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    for name in ["W0", "W3", "L1", "L2"] {
        assert!(text.contains(name));
    }
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 3);
}

#[test]
fn classify_refuses_invalid_structures() {
    let dir = TempDir::new().unwrap();
    let o = papm(&["classify", s(&write(&dir, "trace.json", TRACE_ONE))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_to_stdout_and_file_agree() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let spec = fixture("s3-line");
    let a = papm(&["report", s(&spec)]);
    let b = papm(&["report", s(&spec), "--out", s(&out)]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(code(&b), 0, "{}", stderr(&b));
    assert_eq!(stdout(&a), std::fs::read_to_string(&out).unwrap());
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["summary"]["fail"], 0);
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
}

#[test]
fn report_point_selection() {
    let spec = fixture("warped");
    let o = papm(&["report", s(&spec), "--point", "1"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["points"][0]["index"], 1);
    assert_eq!(v["points"].as_array().unwrap().len(), 1);
    let o = papm(&["report", s(&spec), "--point", "7"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("out of range"));
}

#[test]
fn tolerance_from_flag_and_environment() {
    let spec = fixture("flat-product");
    let tol_of = |o: &Output| -> f64 {
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v["tolerance"].as_f64().unwrap()
    };
    assert_eq!(tol_of(&papm(&["report", s(&spec)])), 1e-9);
    assert_eq!(tol_of(&papm_env(&["report", s(&spec)], Some("1e-7"))), 1e-7);
    assert_eq!(
        tol_of(&papm_env(&["report", s(&spec), "--tol", "1e-5"], Some("1e-7"))),
        1e-5
    );
    assert_eq!(code(&papm(&["report", s(&spec), "--tol", "-1"])), 2);
    assert_eq!(code(&papm(&["validate", s(&spec), "--tol", "abc"])), 2);
    assert_eq!(code(&papm_env(&["validate", s(&spec)], Some("0"))), 2);
}

#[test]
fn report_fails_on_axiom_violation() {
    let dir = TempDir::new().unwrap();
    let o = papm(&["report", s(&write(&dir, "trace.json", TRACE_ONE))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("fail 0:axioms.trace"), "{}", stderr(&o));
}

#[test]
fn hypothesis_not_met_does_not_fail_the_run() {
    let o = papm(&["report", s(&fixture("rotating-2d"))]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["summary"]["hypothesis_not_met"].as_u64().unwrap() > 0);
}

#[test]
fn selftest_passes() {
    let o = papm(&["selftest"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("selftest passed"));
}
