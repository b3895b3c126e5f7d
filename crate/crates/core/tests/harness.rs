mod common;

use common::fixture;
use pgt_core::harness::{
    emit_report, load_spec, make_hard_instance, parse_spec, run_experiment, spec_to_json,
    BooleanFunction, ExperimentSpec, Report, REPORT_FILE, ROWS_FILE,
};
use pgt_core::Error;
use serde_json::Value;

const SMALL: &str = r#"{
    "version": 1,
    "kind": "generalization_sweep",
    "n_qubits": 1,
    "source": "pauli_local",
    "m_values": [4, 12],
    "gamma": 0.1,
    "eta": 0.02,
    "n_test": 200,
    "seeds": [3, 4, 5]
}"#;

fn small() -> ExperimentSpec {
    parse_spec(SMALL).unwrap()
}

#[test]
fn fixtures_round_trip_through_normal_form() {
    for name in [
        "generalization.json",
        "measure_once.json",
        "lower_bound.json",
        "adaptive.json",
    ] {
        let spec = load_spec(&fixture(name)).unwrap();
        let text = spec_to_json(&spec).unwrap();
        let again = parse_spec(&text).unwrap();
        assert_eq!(spec, again, "{name}");
        assert_eq!(text, spec_to_json(&again).unwrap(), "{name}");
    }
}

#[test]
fn misspelled_key_is_named() {
    match parse_spec(&SMALL.replace("\"gamma\"", "\"gama\"")) {
        Err(e @ Error::UnknownKeys(_)) => {
            assert!(e.to_string().contains("gama"), "{e}");
            assert_eq!(e.exit_code(), 2);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn schema_violations_are_located() {
    match parse_spec(&SMALL.replace("[4, 12]", "[4, \"x\"]")) {
        Err(Error::Config { path, .. }) => assert_eq!(path, "m_values[1]"),
        other => panic!("{other:?}"),
    }
    match parse_spec(&SMALL.replace("\"pauli_local\"", "{\"haar_projector\": {\"rank\": -1}}")) {
        Err(Error::Config { path, .. }) => {
            assert!(path.starts_with("source.haar_projector"), "{path}")
        }
        other => panic!("{other:?}"),
    }
    for bad in [
        SMALL.replace("\"version\": 1", "\"version\": 2"),
        SMALL.replace("\"gamma\": 0.1", "\"gamma\": 1.5"),
        SMALL.replace("[4, 12]", "[]"),
        SMALL.replace(
            "\"kind\": \"generalization_sweep\"",
            "\"kind\": \"lower_bound\"",
        ),
        SMALL.replace("\"n_qubits\": 1", "\"n_qubits\": 11"),
    ] {
        assert!(
            matches!(parse_spec(&bad), Err(Error::Validation(_))),
            "{bad}"
        );
    }
}

fn json_type(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) if n.is_u64() || n.is_i64() => "integer",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn check_fields(schema: &Value, obj: &Value, what: &str) {
    for (key, want) in schema.as_object().unwrap() {
        let got = obj.get(key).unwrap_or_else(|| panic!("{what} lacks {key}"));
        let got = json_type(got);
        // integral floats serialize as integers only when typed as such
        let ok = got == want || (want == "number" && got == "integer");
        assert!(ok, "{what}.{key}: {got}, expected {want}");
    }
}

#[test]
fn report_matches_golden_schema() {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("report_schema.json")).unwrap())
            .unwrap();
    let report = run_experiment(&small()).unwrap();
    let value = serde_json::to_value(&report).unwrap();
    check_fields(&schema["report"], &value, "report");
    check_fields(&schema["rng"], &value["rng"], "rng");
    for row in value["rows"].as_array().unwrap() {
        check_fields(&schema["row"], row, "row");
    }
    for agg in value["aggregates"].as_array().unwrap() {
        check_fields(&schema["aggregate"], agg, "aggregate");
    }
    let back: Report = serde_json::from_value(value).unwrap();
    assert_eq!(back, report);
}

#[test]
fn identical_specs_give_identical_bodies() {
    let spec = small();
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(a.canonical_body().unwrap(), b.canonical_body().unwrap());
    assert_eq!(a.rows_csv(), b.rows_csv());
    assert!(!a.canonical_body().unwrap().contains("wall_time"));
}

#[test]
fn rows_cover_seeds_by_m() {
    let report = run_experiment(&small()).unwrap();
    assert_eq!(report.rows.len(), 3 * 2);
    for (i, row) in report.rows.iter().enumerate() {
        assert_eq!(row.row, i);
        assert_eq!(row.seed, [3, 4, 5][i / 2]);
        assert_eq!(row.m, [4, 12][i % 2]);
        assert_eq!(row.sigma_valid, Some(true));
        assert!(row.error.is_none());
    }
    for m in [4, 12] {
        assert_eq!(report.aggregate_for(m).unwrap().rows, 3);
    }
}

#[test]
fn adding_a_seed_leaves_other_rows_unchanged() {
    let spec = small();
    let mut wider = spec.clone();
    wider.seeds = pgt_core::harness::SeedSpec::List(vec![9, 3, 4, 5]);
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&wider).unwrap();
    for row in &a.rows {
        let twin = b
            .rows
            .iter()
            .find(|r| r.seed == row.seed && r.m == row.m)
            .unwrap();
        assert_eq!(row.test_error, twin.test_error);
        assert_eq!(row.final_loss, twin.final_loss);
    }
}

#[test]
fn control_rows_have_zero_error() {
    let mut spec = small();
    spec.control = true;
    let report = run_experiment(&spec).unwrap();
    assert!(report.rows.iter().all(|r| r.test_error == Some(0.0)));
}

fn qubit_bit(b: usize, i: usize, k: usize) -> bool {
    (b >> (k - 1 - i)) & 1 == 1
}

/// `Tr(E_i ρ_y)` from diagonals built qubit by qubit.
fn product_expectation(k: usize, gamma: f64, y: u64, i: usize) -> f64 {
    let q = |j: usize| {
        if (y >> j) & 1 == 1 {
            0.5 + gamma
        } else {
            0.5 - gamma
        }
    };
    (0..1usize << k)
        .filter(|&b| qubit_bit(b, i, k))
        .map(|b| {
            (0..k)
                .map(|j| if qubit_bit(b, j, k) { q(j) } else { 1.0 - q(j) })
                .product::<f64>()
        })
        .sum()
}

#[test]
fn hard_instance_is_exact() {
    for (k, gamma, epsilon) in [
        (2, 0.1, 0.05),
        (3, 0.45, 0.1),
        (3, 0.25, 0.2),
        (5, 0.3, 0.0),
    ] {
        let h = make_hard_instance(k, gamma, epsilon).unwrap();
        let w = h.weights();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((w[0] - (1.0 - 4.0 * epsilon)).abs() < 1e-15);
        assert!(w[1..]
            .iter()
            .all(|&x| (x - 4.0 * epsilon / (k - 1) as f64).abs() < 1e-15));
        for (i, e) in h.effects().iter().enumerate() {
            let diag = e.matrix().diagonal_values();
            assert!(e.matrix().is_diagonal());
            for (b, d) in diag.iter().enumerate() {
                assert_eq!(*d, f64::from(u8::from(qubit_bit(b, i, k))));
            }
        }
        for y in 0..1u64 << k {
            let rho = h.state(y).unwrap();
            for i in 0..k {
                let want = if (y >> i) & 1 == 1 {
                    0.5 + gamma
                } else {
                    0.5 - gamma
                };
                assert!((product_expectation(k, gamma, y, i) - want).abs() < 1e-12);
                let got = h.effects()[i].matrix().trace_product(rho.matrix());
                assert!((got - want).abs() < 1e-12, "k={k} y={y} i={i}: {got}");
                assert_eq!(h.value(y, i), want);
            }
        }
    }
}

#[test]
fn hard_instance_is_fine_shattered_by_brute_force() {
    for k in 2..=3 {
        let gamma = 0.2;
        let h = make_hard_instance(k, gamma, 0.1).unwrap();
        // every labeling is realized with margin γ and zero window
        for y in 0..1u64 << k {
            for i in 0..k {
                let f = product_expectation(k, gamma, y, i);
                if (y >> i) & 1 == 1 {
                    assert!(f >= 0.5 + gamma - 1e-12);
                } else {
                    assert!(f <= 0.5 - gamma + 1e-12);
                }
            }
        }
        assert!(h.is_fine_shattered(0.0).unwrap());
    }
}

#[test]
fn hard_instance_rejects_bad_parameters() {
    assert!(make_hard_instance(1, 0.2, 0.1).is_err());
    assert!(make_hard_instance(3, 0.5, 0.1).is_err());
    assert!(make_hard_instance(3, 0.2, 0.25).is_err());
    let h = make_hard_instance(3, 0.2, 0.1).unwrap();
    assert!(h.state(8).is_err());
}

fn lower_bound_spec(m_values: &str, k: usize) -> ExperimentSpec {
    parse_spec(&format!(
        r#"{{
            "version": 1,
            "kind": "lower_bound",
            "n_qubits": {k},
            "state": {{"hard_instance": {{"k": {k}, "gamma": 0.45}}}},
            "m_values": {m_values},
            "gamma": 0.45,
            "epsilon": 0.1,
            "eta": 0.01,
            "seeds": {{"start": 0, "count": 20}}
        }}"#
    ))
    .unwrap()
}

#[test]
fn learning_from_nothing_fails_the_hard_instance() {
    let report = run_experiment(&lower_bound_spec("[0]", 4)).unwrap();
    let rate = report.aggregate_for(0).unwrap().failure_rate.unwrap();
    assert!(rate >= 0.25, "{rate}");
    assert!(report
        .rows
        .iter()
        .all(|r| r.failed.is_some() && r.error.is_none()));
}

#[test]
fn control_passes_the_hard_instance() {
    let mut spec = lower_bound_spec("[0, 3]", 4);
    spec.control = true;
    let report = run_experiment(&spec).unwrap();
    assert!(report
        .aggregates
        .iter()
        .all(|a| a.failure_rate == Some(0.0)));
}

fn adaptive_spec(rounds: usize, function: &str, m_values: &str) -> ExperimentSpec {
    parse_spec(&format!(
        r#"{{
            "version": 1,
            "kind": "adaptive",
            "n_qubits": 1,
            "source": "spectral",
            "m_values": {m_values},
            "gamma": 0.1,
            "eta": 0.02,
            "n_test": 100,
            "seeds": [0, 1, 2, 3, 4],
            "adaptive": {{"rounds": {rounds}, "function": {function}}}
        }}"#
    ))
    .unwrap()
}

#[test]
fn constant_function_is_predicted_exactly() {
    let report = run_experiment(&adaptive_spec(2, r#"{"constant": true}"#, "[10]")).unwrap();
    for row in &report.rows {
        assert!((row.exact.unwrap() - 1.0).abs() < 1e-12);
        assert!((row.estimate.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(row.test_error, Some(0.0));
    }
}

#[test]
fn one_round_reduces_to_plain_prediction() {
    let spec = adaptive_spec(1, "\"first\"", "[40]");
    assert_eq!(
        spec.adaptive.as_ref().unwrap().function,
        BooleanFunction::First
    );
    let report = run_experiment(&spec).unwrap();
    for row in &report.rows {
        assert!(row.mean_abs_error.unwrap() <= 0.1, "{row:?}");
        assert_eq!(row.sigma_valid, Some(true));
    }
}

#[test]
fn adaptive_error_shrinks_with_m() {
    let report = run_experiment(&adaptive_spec(2, "\"parity\"", "[2, 60]")).unwrap();
    let at = |m| {
        report
            .aggregate_for(m)
            .unwrap()
            .median_mean_abs_error
            .unwrap()
    };
    assert!(at(60) <= at(2), "{} > {}", at(60), at(2));
    assert!(report.rows.iter().all(|r| r.sigma_valid == Some(true)));
}

#[test]
fn emit_writes_both_files() {
    let report = run_experiment(&small()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/out");
    let (json, csv) = emit_report(&report, &out).unwrap();
    assert_eq!(json, out.join(REPORT_FILE));
    assert_eq!(csv, out.join(ROWS_FILE));
    let back: Report = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(back, report);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + report.rows.len());
    assert_eq!(text.lines().next().unwrap(), Report::CSV_HEADER);
    let leftovers = std::fs::read_dir(&out).unwrap().count();
    assert_eq!(leftovers, 2);
}
