use std::process::{Command, Output};

use serde_json::Value;

fn ncopy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncopy"))
        .args(args)
        .output()
        .expect("ncopy binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = ncopy(&all);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let value = serde_json::from_str(&stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {stdout}"));
    (out.status.code().unwrap(), value)
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn analyze_qubit_transposition_two_copies() {
    let (code, r) = json(&["analyze", "--map", "transposition:d=2", "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["command"], "analyze");
    assert_eq!(r["map"]["d_in"], 2);
    assert_eq!(r["map"]["d_out"], 2);
    let row = &r["results"][0];
    assert_eq!(row["N"], 2);
    assert_eq!(row["dim"], 8);
    assert!((f(&row["lambda_min"]) + 0.5).abs() < 1e-12);
    assert_eq!(row["psd"], false);
    assert_eq!(r["verdicts"]["implementable"], false);
    for key in ["version", "seed", "tol", "elapsed_s"] {
        assert!(r["meta"].get(key).is_some(), "meta.{key} missing");
    }
}

#[test]
fn analyze_identity_is_implementable() {
    let (code, r) = json(&["analyze", "--map", "id:d=3", "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"][0]["psd"], true);
    assert_eq!(r["verdicts"]["implementable"], true);
}

#[test]
fn malformed_spec_exits_two_and_names_field() {
    let out = ncopy(&["analyze", "--map", "transposition:d=x"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains('d'), "{err}");
}

#[test]
fn missing_map_exits_two() {
    assert_eq!(ncopy(&["analyze"]).status.code(), Some(2));
}

#[test]
fn dimension_limit_exits_three_with_partial_sweep() {
    let (code, r) = json(&[
        "sweep", "--map", "T:d=2", "--n-max", "8", "--max-dim", "64",
    ]);
    assert_eq!(code, 3);
    let rows = r["results"].as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|row| f(&row["dim"]) <= 64.0));
    assert!(!r["verdicts"]["limit_reached_at"].is_null());
}

#[test]
fn analyze_over_limit_exits_three() {
    let out = ncopy(&["analyze", "--map", "T:d=2", "--n", "10", "--max-dim", "256"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_subset_passes() {
    let (code, r) = json(&["verify", "--only", "antisym"]);
    assert_eq!(code, 0);
    let rows = r["results"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["id"], "antisym-eigenvectors");
    assert_eq!(r["verdicts"]["all_passed"], true);
}

#[test]
fn verify_with_zero_tolerance_fails_with_exit_one() {
    let (code, r) = json(&["verify", "--only", "qubit-spectrum", "--tol", "0"]);
    assert_eq!(code, 1);
    assert_eq!(r["verdicts"]["all_passed"], false);
}

#[test]
fn verify_unknown_check_exits_two() {
    assert_eq!(ncopy(&["verify", "--only", "no-such-check"]).status.code(), Some(2));
}

#[test]
fn full_verify_passes() {
    let out = ncopy(&["verify"]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(out.status.code(), Some(0), "{stderr}");
    assert_eq!(stderr.lines().filter(|l| l.starts_with("PASS")).count(), 10);
}

#[test]
fn dumped_choi_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("choi.json");
    let p = path.to_str().unwrap();
    let spec = "mix:[id:d=2@0.3,T:d=2@0.7]";
    let (code, direct) = json(&["analyze", "--map", spec, "--n", "3", "--dump-choi", p]);
    assert_eq!(code, 0);

    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file["d_in"], 2);
    assert_eq!(file["d_out"], 2);
    assert_eq!(file["choi"].as_array().unwrap().len(), 4);
    assert_eq!(file["choi"][0][0].as_array().unwrap().len(), 2);

    let at = format!("@{p}");
    let (code, loaded) = json(&["analyze", "--map", &at, "--n", "3"]);
    assert_eq!(code, 0);
    let a = f(&direct["results"][0]["lambda_min"]);
    let b = f(&loaded["results"][0]["lambda_min"]);
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    assert_eq!(direct["verdicts"]["implementable"], loaded["verdicts"]["implementable"]);
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let args = ["analyze", "--map", "choi3", "--n", "2", "--basis-trials", "3", "--seed", "7"];
    let (_, mut a) = json(&args);
    let (_, mut b) = json(&args);
    a["meta"]["elapsed_s"] = Value::Null;
    b["meta"]["elapsed_s"] = Value::Null;
    assert_eq!(a, b);
}

#[test]
fn sweep_csv_has_interface_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = ncopy(&[
        "sweep", "--map", "T:d=2", "--n-max", "3", "--csv", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["N", "dim", "lambda_min", "psd", "thm5_lambda_min", "thm5_conclusive"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let lam: f64 = rows[2][2].parse().unwrap();
    assert!((lam + 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn qubit_transposition_never_implementable_in_sweep() {
    let (code, r) = json(&["sweep", "--map", "T:d=2", "--n-max", "6"]);
    assert_eq!(code, 0);
    assert!(r["verdicts"]["min_n"].is_null());
    let rows = r["results"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for (k, row) in rows.iter().enumerate() {
        let n = (k + 1) as f64;
        assert!((f(&row["lambda_min"]) + 1.0 / n).abs() < 1e-12);
    }
}

#[test]
fn identity_sweep_stops_at_one() {
    let (code, r) = json(&["sweep", "--map", "id:d=2", "--n-max", "4"]);
    assert_eq!(code, 0);
    assert_eq!(r["verdicts"]["min_n"], 1);
    assert_eq!(r["results"].as_array().unwrap().len(), 1);
}

#[test]
fn critical_noise_for_qubit_transposition() {
    let (code, r) = json(&["thresholds", "--map", "T:d=2", "--n", "4"]);
    assert_eq!(code, 0);
    assert!((f(&r["verdicts"]["critical_eta_a"]) - 1.0 / 3.0).abs() < 1e-9);
    assert!((f(&r["verdicts"]["critical_eta_b"]) - 1.0 / 3.0).abs() < 1e-6);
}

#[test]
fn noisy_map_above_threshold_is_implementable() {
    let (code, r) = json(&["analyze", "--map", "T:d=2", "--n", "2", "--eta", "0.51"]);
    assert_eq!(code, 0);
    assert_eq!(r["verdicts"]["implementable"], true);
    let (_, r) = json(&["analyze", "--map", "T:d=2", "--n", "2", "--eta", "0.49"]);
    assert_eq!(r["verdicts"]["implementable"], false);
}

#[test]
fn table_format_is_default() {
    let out = ncopy(&["analyze", "--map", "T:d=2", "--n", "2"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("lambda_min"));
    assert!(stdout.contains("-0.500000000000"));
}
