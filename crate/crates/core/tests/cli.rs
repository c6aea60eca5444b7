use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn relcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relcalc"))
        .args(args)
        .env_remove("RELCALC_SEED")
        .env_remove("RELCALC_TOL_EQ")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const MIX: &str = r#"{
  "schema": "relspec/1", "dim_H": 2, "dim_K": 2,
  "generators": [ {"f": [1, 0], "fp": [1, 0]}, {"f": [0, 0], "fp": [0, 1]} ]
}"#;

const MUL: &str = r#"{
  "dim_H": 2, "dim_K": 2,
  "generators": [ {"f": [0, 0], "fp": [1, 0]}, {"f": [0, 0], "fp": [0, 1]} ]
}"#;

const DIAG_OPERATOR: &str = r#"{
  "dim_H": 2, "dim_K": 2, "operator": [[1, 0], [0, 2]]
}"#;

const ID1_COMPLEX: &str = r#"{
  "dim_H": 1, "dim_K": 1, "field": "complex",
  "generators": [ {"f": [[0, 1]], "fp": [[0, 1]]} ]
}"#;

fn analyze_json(path: &Path) -> Value {
    let out = relcalc(&["analyze", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn analyze_reports_parts_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (MIX, "mixed", [1, 2, 0, 1]),
        (MUL, "maximally_singular", [0, 2, 0, 2]),
        (DIAG_OPERATOR, "regular", [2, 2, 0, 0]),
        (ID1_COMPLEX, "regular", [1, 1, 0, 0]),
    ];
    for (i, (text, label, dims)) in cases.into_iter().enumerate() {
        let path = write(dir.path(), &format!("r{i}.json"), text);
        let v = analyze_json(&path);
        assert_eq!(v["classification"]["label"], label);
        let parts = &v["parts"];
        let got: Vec<u64> = ["dom", "ran", "ker", "mul"]
            .iter()
            .map(|k| parts[k]["dim"].as_u64().unwrap())
            .collect();
        assert_eq!(got, dims.map(|d| d as u64));
        for key in [
            "input_digest",
            "decomposition",
            "stone",
            "metric",
            "residuals",
            "tolerances",
            "version",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["residuals"]
            .as_array()
            .unwrap()
            .iter()
            .all(|r| r["passed"] == true));
    }
}

#[test]
fn analyze_text_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "mix.json", MIX);
    let a = relcalc(&["analyze", path.to_str().unwrap()]);
    let b = relcalc(&["analyze", path.to_str().unwrap()]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("classification mixed"));
}

#[test]
fn stone_routes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "mul.json", MUL);
    for method in ["projection", "resolvent", "both"] {
        let out = relcalc(&[
            "stone",
            path.to_str().unwrap(),
            "--method",
            method,
            "--format",
            "json",
        ]);
        assert_eq!(code(&out), 0);
        let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["classification"]["maximally_singular"], true, "{v}");
    }
}

#[test]
fn metric_pair_and_vector() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "mix.json", MIX);
    let p = path.to_str().unwrap();
    let out = relcalc(&["metric", p, "--pair", "1", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let sing = v["metric"]["singular"]["variational"].as_f64().unwrap();
    assert!((sing - 1.0).abs() < 1e-9, "{v}");

    let out = relcalc(&["metric", p, "--vector", "e1", "e1+e2"]);
    assert_eq!(code(&out), 0);
    // (e1, e1 + e2) is not in the graph of a relation missing e2 in its domain
    let out = relcalc(&["metric", p, "--vector", "e2", "e1"]);
    assert_eq!(code(&out), 1);
    let out = relcalc(&["metric", p, "--pair", "7"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(code(&relcalc(&["analyze", bad.to_str().unwrap()])), 1);
    let wrong = write(
        dir.path(),
        "wrong.json",
        r#"{"dim_H": 2, "dim_K": 1, "generators": [{"f": [1], "fp": [1]}]}"#,
    );
    assert_eq!(code(&relcalc(&["analyze", wrong.to_str().unwrap()])), 1);
    let extra = write(
        dir.path(),
        "extra.json",
        r#"{"dim_H": 1, "dim_K": 1, "generators": [], "colour": 1}"#,
    );
    assert_eq!(code(&relcalc(&["analyze", extra.to_str().unwrap()])), 1);
    assert_eq!(code(&relcalc(&["analyze", "/nonexistent/spec.json"])), 1);
    assert_eq!(code(&relcalc(&["gallery", "nosuch"])), 1);
    assert_eq!(code(&relcalc(&["verify", "--suite", "nosuch"])), 1);
    assert_eq!(code(&relcalc(&["analyze"])), 1);
    assert_eq!(code(&relcalc(&["--help"])), 0);
}

#[test]
fn ambiguous_rank_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"dim_H": 1, "dim_K": 1, "generators": [ {"f": [1], "fp": [0]}, {"f": [1], "fp": [1e-9]} ]}"#;
    let path = write(dir.path(), "near.json", spec);
    let out = relcalc(&["analyze", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    // well away from the cutoff the same shape is fine
    let spec = r#"{"dim_H": 1, "dim_K": 1, "generators": [ {"f": [1], "fp": [0]}, {"f": [1], "fp": [1e-3]} ]}"#;
    let path = write(dir.path(), "clear.json", spec);
    assert_eq!(code(&relcalc(&["analyze", path.to_str().unwrap()])), 0);
}

#[test]
fn nearly_singular_operator_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"dim_H": 2, "dim_K": 2, "operator": [[6, 0], [0, 5e-5]]}"#;
    let path = write(dir.path(), "op.json", spec);
    assert_eq!(code(&relcalc(&["stone", path.to_str().unwrap()])), 3);
}

#[test]
fn gallery_list_show_and_emit() {
    let out = relcalc(&["gallery", "list"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 13);
    for name in stdout(&out).lines() {
        assert_eq!(code(&relcalc(&["gallery", name])), 0, "{name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cp.json");
    let out = relcalc(&[
        "gallery",
        "cartesian_product",
        "--emit",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = analyze_json(&path);
    assert_eq!(v["classification"]["label"], "singular");
}

#[test]
fn verify_passes_and_is_seed_stable() {
    let a = relcalc(&[
        "verify",
        "--cases",
        "12",
        "--max-dim",
        "4",
        "--seed",
        "5",
        "--format",
        "json",
    ]);
    assert_eq!(code(&a), 0, "{}", stdout(&a));
    let b = Command::new(env!("CARGO_BIN_EXE_relcalc"))
        .args([
            "verify",
            "--cases",
            "12",
            "--max-dim",
            "4",
            "--format",
            "json",
        ])
        .env("RELCALC_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(stdout(&a), stdout(&b));
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["seed"], 5);
    assert_eq!(v["suites"].as_array().unwrap().len(), 11);
}

#[test]
fn verify_failure_writes_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = relcalc(&[
        "verify",
        "--suite",
        "stone",
        "--cases",
        "6",
        "--max-dim",
        "4",
        "--tol",
        "1e-30",
        "--artifact-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", stdout(&out));
    let files: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(files.len(), 1);
    let w: Value = serde_json::from_str(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
    assert_eq!(w["suite"], "stone");
    assert!(!w["failures"].as_array().unwrap().is_empty());
    // the shrunk spec is itself a loadable input
    let spec = write(dir.path(), "spec.json", &w["spec"].to_string());
    assert_ne!(code(&relcalc(&["analyze", spec.to_str().unwrap()])), 1);
}

#[test]
fn bad_tolerance_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_relcalc"))
        .args(["gallery", "zero"])
        .env("RELCALC_TOL_EQ", "abc")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}
