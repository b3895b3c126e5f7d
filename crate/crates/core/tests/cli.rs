mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture;
use serde_json::Value;

fn pgt(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pgt"));
    cmd.args(args).env_remove("PGT_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("pgt runs")
}

fn fx(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn json_stdout(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn learn_prints_a_hypothesis() {
    let v = json_stdout(&pgt(&["learn", &fx("learn.json")], &[]));
    assert_eq!(v["converged"], true);
    assert!(v["max_residual"].as_f64().unwrap() <= 0.01);
    assert_eq!(v["sigma"]["dim"], 2);
    let e = v["sigma"]["entries"].as_array().unwrap();
    assert!((e[0][0].as_f64().unwrap() - 0.8).abs() <= 0.01 + 1e-9);
    assert!((e[1][0].as_f64().unwrap() - 0.3).abs() <= 0.01 + 1e-9);
}

#[test]
fn bounds_prints_csv() {
    let out = pgt(&["bounds", "--grid", &fx("bounds_grid.json")], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, pgt_core::bounds::CSV_HEADER);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), pgt_core::bounds::GRID_FORMULAS.len() * 8 - 4);
    assert!(rows
        .iter()
        .all(|r| r.split(',').count() == header.split(',').count()));
    let skipped = String::from_utf8(out.stderr).unwrap();
    assert_eq!(
        skipped.lines().filter(|l| l.starts_with("skipped")).count(),
        4
    );
}

#[test]
fn witness_reports_statistics() {
    let v = json_stdout(&pgt(&["protocol", "witness", &fx("witness.json")], &[]));
    assert_eq!(v["method"], "exact");
    assert!((v["epsilon"].as_f64().unwrap() - 1e-4).abs() < 1e-12);
    let p = v["success_prob"].as_f64().unwrap();
    assert!(p >= v["bound_ii"].as_f64().unwrap() && p <= 1.0, "{p}");
    assert_eq!(v["std_error"], 0.0);
}

#[test]
fn verify_reports_both_distributions() {
    let v = json_stdout(&pgt(&["protocol", "verify", &fx("verify.json")], &[]));
    for which in ["exact", "sampled"] {
        let d = &v[which];
        let total: f64 = ["accept", "reject", "dont_know"]
            .iter()
            .map(|k| d[k].as_f64().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-9, "{which}: {total}");
    }
    assert_eq!(v["runs"], 500);
}

#[test]
fn oneway_reports_code_and_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "oneway.json",
        r#"{"input_bits": 4, "codeword_length": 16, "x": 5, "k": 8, "y_support": [5, 6, 7],
            "options": {"n_test": 50}}"#,
    );
    let v = json_stdout(&pgt(&["protocol", "oneway", &spec], &[]));
    assert_eq!(v["code_length"], 16);
    let eta = v["eta_protocol"].as_f64().unwrap();
    let d = v["code_min_distance"].as_f64().unwrap();
    assert!(eta >= (1.0 - 2.0 * d / 16.0).powi(2) - 1e-12);
    let rate = v["test_error_rate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&rate));
}

#[test]
fn experiment_writes_report_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"version": 1, "kind": "generalization_sweep", "n_qubits": 1, "source": "pauli_local",
            "m_values": [5], "gamma": 0.1, "eta": 0.02, "n_test": 50, "seeds": [0, 1]}"#,
    );
    let out = dir.path().join("out");
    let status = pgt(&["experiment", &spec, "--out", &out.to_string_lossy()], &[]);
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(out.join("rows.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"version": 1, "kind": "generalization_sweep", "n_qubits": 1, "source": "pauli_local",
            "m_values": [5], "gama": 0.1, "seeds": [0]}"#,
    );
    let out = pgt(
        &[
            "experiment",
            &spec,
            "--out",
            &dir.path().join("o").to_string_lossy(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gama"));

    let bad = write(
        dir.path(),
        "learn.json",
        r#"{"training": {"dim": 2, "effects": [], "labels": {"bit": [true]}}}"#,
    );
    assert_eq!(pgt(&["learn", &bad], &[]).status.code(), Some(2));

    let located = write(
        dir.path(),
        "grid.json",
        r#"{"n_qubits": ["two"], "gamma": [0.1], "epsilon": [0.1], "delta": [0.1]}"#,
    );
    let out = pgt(&["bounds", "--grid", &located], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_qubits[0]"));
}

#[test]
fn construction_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // no 12-bit linear code of length 16 reaches the required distance
    let spec = write(
        dir.path(),
        "oneway.json",
        r#"{"input_bits": 12, "codeword_length": 16, "x": 0, "k": 1}"#,
    );
    let out = pgt(&["protocol", "oneway", &spec], &[]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn missing_files_exit_with_one() {
    assert_eq!(
        pgt(&["learn", "/nonexistent/spec.json"], &[]).status.code(),
        Some(1)
    );
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("witness.json"))
        .unwrap()
        .replace("\"exact\"", "\"monte_carlo\"");
    let spec = write(dir.path(), "witness.json", &text);
    let run = |env: &[(&str, &str)], extra: &[&str]| {
        let mut args = vec!["protocol", "witness", spec.as_str()];
        args.extend_from_slice(extra);
        json_stdout(&pgt(&args, env))
    };
    let a = run(&[("PGT_SEED", "7")], &[]);
    assert_eq!(a["method"], "monte_carlo");
    assert_eq!(a, run(&[("PGT_SEED", "7")], &[]));
    assert_eq!(a, run(&[], &["--seed", "7"]));
    assert_eq!(run(&[], &[]), run(&[("PGT_SEED", "0")], &[]));
    let other: Vec<Value> = (8..12)
        .map(|s| run(&[("PGT_SEED", &s.to_string())], &[]))
        .collect();
    assert!(other.iter().any(|v| v["success_prob"] != a["success_prob"]));
}
