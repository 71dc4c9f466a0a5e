use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fracspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracspec"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

const CANTOR4: &str = r#"{"d": 1, "R": "4", "B": ["0", "1/2"], "L": ["0", "1"]}"#;

#[test]
fn validate_cantor4() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c4.json", CANTOR4);
    let out = fracspec(&["--system", p.to_str().unwrap(), "validate"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["hadamard_deviation"].as_f64(), Some(0.0));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["system"], p.to_str().unwrap());
    assert_eq!(v["validation"]["compatible"], true);
}

#[test]
fn certify_reports_spanning_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "l0.json", r#"{"d": 1, "R": "4", "B": ["0"], "L": ["0"]}"#);
    let out = fracspec(&["--system", p.to_str().unwrap(), "certify"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    let failures = v["result"]["failures"].as_array().unwrap();
    assert!(failures.iter().any(|f| f.as_str().unwrap().contains("L does not span")));
}

#[test]
fn certify_cantor4_and_non_hadamard() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c4.json", CANTOR4);
    assert_eq!(
        fracspec(&["--system", p.to_str().unwrap(), "certify"]).status.code(),
        Some(0)
    );
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"d": 1, "R": "4", "B": ["0", "1/4"], "L": ["0", "1"]}"#,
    );
    let out = fracspec(&["--system", bad.to_str().unwrap(), "certify"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["result"]["basis_certified"], false);
}

#[test]
fn clique_odd_example() {
    let out = fracspec(&["clique", "--R", "3", "--a", "0.5", "--window", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["size"], 2);
    assert_eq!(v["result"]["witness"], serde_json::json!([0, 1]));
}

#[test]
fn fourier_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c4.json", CANTOR4);
    let out = fracspec(&[
        "--system",
        p.to_str().unwrap(),
        "--format",
        "csv",
        "--grid",
        "0:2:0.5",
        "fourier",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "t,re,im,abs,tail_bound");
    assert_eq!(data.len(), 6);
    let t1: Vec<f64> = data[3].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(t1[0], 1.0);
    assert_eq!(t1[3], 0.0);
    assert!(text.lines().any(|l| l.starts_with("# validation:")));
}

#[test]
fn empty_completeness_grid() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c4.json", CANTOR4);
    let out_path = dir.path().join("q.csv");
    let out = fracspec(&[
        "--system",
        p.to_str().unwrap(),
        "--grid",
        "1:0:0.1",
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
        "completeness",
    ]);
    assert_ne!(out.status.code(), Some(1));
    let text = std::fs::read_to_string(out_path).unwrap();
    assert_eq!(
        text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>(),
        vec!["t,q"]
    );
}

#[test]
fn parse_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "broken.json",
        "{\n  \"d\": 1,\n  \"R\": \"4\"\n  \"B\": []\n}",
    );
    let out = fracspec(&["--system", p.to_str().unwrap(), "validate"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(fracspec(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(fracspec(&["classify", "--R", "1", "--a", "1/2"]).status.code(), Some(1));
    let help = fracspec(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8(help.stdout).unwrap().contains("RAYON_NUM_THREADS"));
}

#[test]
fn decimal_inputs_warn() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "dec.json",
        r#"{"d": 1, "R": 4, "B": [0, 0.5], "L": [0, 1]}"#,
    );
    let out = fracspec(&["--system", p.to_str().unwrap(), "validate"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(!v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn verdict_exit_codes() {
    assert_eq!(fracspec(&["tiling"]).status.code(), Some(0));
    assert_eq!(
        fracspec(&["tiling", "--translates", "minus-spectrum"]).status.code(),
        Some(2)
    );
    assert_eq!(fracspec(&["classify", "--R", "4", "--a", "1/2"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bin.json",
        r#"{"d": 1, "R": "2", "B": ["0", "1/2"], "L": ["0", "1"]}"#,
    );
    let sys = p.to_str().unwrap();
    assert_eq!(fracspec(&["--system", sys, "certify"]).status.code(), Some(2));
    let sweep = fracspec(&["--system", sys, "sweep", "--r-max", "4"]);
    assert_eq!(sweep.status.code(), Some(0));
    assert_eq!(json(&sweep)["result"]["smallest_certified"], 2);
}

#[test]
fn shipped_system_files_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../systems");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let out = fracspec(&["--system", path.to_str().unwrap(), "validate"]);
        assert_eq!(out.status.code(), Some(0), "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 4);
}
