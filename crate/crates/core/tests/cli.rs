//! End-to-end tests of the `margulis` binary: determinism, exit codes,
//! and round-tripping of the JSON/CSV documents.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_margulis"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn decompose_is_byte_identical_across_runs() {
    let args = [
        "decompose",
        "--angle",
        "pre:[];per:[1]",
        "--rmax",
        "1e4",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sample_is_byte_identical_across_runs() {
    let args = [
        "sample",
        "--angle",
        "1,2,3,1,1,2",
        "--samples",
        "50",
        "--format",
        "csv",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn decompose_json_pieces_are_contiguous() {
    let out = run(&["decompose", "--angle", "pre:[];per:[1]", "--rmax", "1e4"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let pieces = doc["pieces"].as_array().unwrap();
    assert!(!pieces.is_empty());
    assert_eq!(pieces[0]["r_lo"].as_f64().unwrap(), 0.0);
    assert_eq!(
        pieces.last().unwrap()["r_hi"].as_f64().unwrap(),
        doc["r_max"].as_f64().unwrap()
    );
    for w in pieces.windows(2) {
        assert_eq!(
            w[0]["r_hi"].as_f64().unwrap(),
            w[1]["r_lo"].as_f64().unwrap()
        );
    }
    assert!(doc["validation"]["max_residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn json_floats_round_trip_exactly() {
    let out = run(&[
        "sample",
        "--angle",
        "pre:[];per:[1]",
        "--samples",
        "5",
        "--rmax",
        "100",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    // ratio was computed as b / sqrt(r); 17 significant digits must
    // reproduce that f64 bit for bit.
    for row in rows {
        let r = row["r"].as_f64().unwrap();
        let b = row["b"].as_f64().unwrap();
        let ratio = row["ratio"].as_f64().unwrap();
        assert_eq!(ratio, b / r.sqrt());
    }
}

#[test]
fn sample_csv_has_expected_shape() {
    let out = run(&[
        "sample",
        "--angle",
        "pre:[];per:[1]",
        "--samples",
        "10",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,b,k,ratio");
    assert_eq!(lines.len(), 11);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 4);
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dec.json");
    let out = run(&[
        "decompose",
        "--angle",
        "rat:1/3",
        "--rmax",
        "100",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["pieces"].as_array().unwrap().len(), 2);
}

#[test]
fn invalid_angle_exits_1() {
    let out = run(&["decompose", "--angle", "bogus//"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn invalid_epsilon_exits_1() {
    let out = run(&[
        "sample",
        "--angle",
        "pre:[];per:[1]",
        "--epsilon",
        "-1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn decimal_precision_budget_exits_3() {
    // A 16-digit decimal cannot certify deep norm queries to the relative
    // budget; the run must fail with the precision exit code.
    let out = run(&["verify", "--angle", "0.7548776662466927", "--depth", "30"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn rational_pure_parabolic_distort_f_rejected() {
    let out = run(&["distort", "--map", "f", "--angle", "rat:0/1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn distort_h_certifies() {
    let out = run(&[
        "distort",
        "--map",
        "h",
        "--angle",
        "pre:[];per:[1]",
        "--samples",
        "500",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["certified"], serde_json::Value::Bool(true));
    assert!(doc["min_ratio"].as_f64().unwrap() >= 0.25);
    assert!(doc["max_ratio"].as_f64().unwrap() <= 4.0);
}

#[test]
fn verify_reports_all_checks_passing() {
    let out = run(&[
        "verify",
        "--angle",
        "pre:[];per:[1,2]",
        "--rmax",
        "1e4",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], serde_json::Value::Bool(true));
    for check in doc["checks"].as_array().unwrap() {
        assert_eq!(check["pass"], serde_json::Value::Bool(true), "{check}");
    }
}
