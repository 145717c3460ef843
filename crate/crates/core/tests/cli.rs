use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn isopair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isopair")).args(args).output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const W: &str = r#"{"dim": 2, "rows": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]}"#;
const SWAP: &str = r#"{"dim": 2, "U": [[0, 0], [1, 0], [1, 0], [0, 0]], "P": [[1, 0], [0, 0], [0, 0], [0, 0]]}"#;

#[test]
fn classify_neg() {
    let o = isopair(&["classify", "--model", "neg", "--grade", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["format"], "isopair-report/1");
    assert!(!v["provenance"].as_str().unwrap().is_empty());
    assert_eq!(v["result"]["class"], "Negative");
    assert_eq!(v["result"]["eigenvalues"], serde_json::json!([-1.0]));
}

#[test]
fn classify_files() {
    let dir = tempfile::tempdir().unwrap();
    let swap = write(dir.path(), "swap2.json", SWAP);
    let o = isopair(&["classify", "--triple", &swap, "--grade", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["result"]["class"], "OffDiagonal");

    let w = write(dir.path(), "W.json", W);
    let o = isopair(&["classify", "--model", &format!("zero:{w}"), "--grade", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["result"]["class"], "Zero");
    assert_eq!(v["result"]["eigenvalues"], serde_json::json!([]));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(isopair(&["classify", "--model", "nope"]).status.code(), Some(1));
    assert_eq!(isopair(&["classify"]).status.code(), Some(1));
    assert_eq!(isopair(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(isopair(&["verify", "identities", "--tol-rank", "-1"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"dim": 1, "rows": [[[0.5, 0]]]}"#);
    assert_eq!(isopair(&["classify", "--model", &format!("offdiag:{bad}")]).status.code(), Some(1));
    assert_eq!(isopair(&["classify", "--model", "pos", "--csv"]).status.code(), Some(1));
}

#[test]
fn stage2_pairings() {
    let o = isopair(&["verify", "stage2-neg", "--l1", "0.3", "--l2", "0.5i", "--grade", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["result"]["failures"], 0);
}

#[test]
fn stage2_short_truncation_fails() {
    let o = isopair(&["verify", "stage2-neg", "--l1", "0.9", "--l2", "0.9", "--grade", "40"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "W.json", W);
    let csv = dir.path().join("s.csv");
    let summary = dir.path().join("s.json");
    let o = isopair(&[
        "scan",
        "--model",
        &format!("offdiag:{w}"),
        "--zgrid",
        "6x6",
        "--csv",
        "--out",
        csv.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "z_re,z_im,l1_re,l1_im,l2_re,l2_im,in_spectrum,break_stages,certificate,residual"
    );
    assert_eq!(lines.count(), 6 * 6 * 4);
    let s: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["result"]["class"], "OffDiagonal");
    assert_eq!(s["passed"], true);
}

#[test]
fn scan_lambda_grid() {
    let o = isopair(&["scan", "--model", "psi", "--lgrid", "5x5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["result"]["certified_in_spectrum"], 25);
    assert_eq!(isopair(&["scan", "--model", "psi", "--lgrid", "5x6"]).status.code(), Some(1));
    assert_eq!(isopair(&["scan", "--model", "psi", "--zgrid", "4x4"]).status.code(), Some(1));
}

#[test]
fn structural_commands() {
    for args in [
        &["defect", "--model", "pos", "--grade", "4"][..],
        &["wold", "--model", "pos", "--of", "v1"],
        &["fringe", "--model", "offdiag:diag1i"],
        &["sarkar", "--model", "zero:diag1i"],
        &["intertwine-check", "--grade", "6"],
        &["verify", "embedding"],
        &["verify", "intertwiners", "--grade", "5"],
    ] {
        let o = isopair(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(json(&o)["passed"], true, "{args:?}");
    }
}

#[test]
fn verify_csv_lists_checks() {
    let o = isopair(&["verify", "koszul-oracle", "--count", "10", "--csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("check,deviation,tolerance,passed\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}
