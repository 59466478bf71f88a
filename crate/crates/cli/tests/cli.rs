use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn crparam(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crparam"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const DISK: &str = r#"{"vars": 2, "union": [[{"poly": "x1^2 + x2^2 - 1", "rel": "<"}]]}"#;
const SQUARE: &str = r#"{"vars": 2, "union": [[]]}"#;

#[test]
fn resolve1d_square_gives_two_charts() {
    let dir = tempfile::tempdir().unwrap();
    let out = crparam(
        dir.path(),
        &[
            "resolve1d",
            "--poly",
            "x1^2",
            "--r",
            "1",
            "--out",
            "res.json",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&dir.path().join("res.json"));
    assert_eq!(v["chart_count"], 2);
    assert_eq!(
        v["charts"][1]["provenance"],
        serde_json::json!(["c1-split", "inverse"])
    );
}

#[test]
fn outputs_are_byte_identical_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let out = crparam(
            dir.path(),
            &[
                "resolve1d",
                "--poly",
                "x1^3 - (1/2)*x1",
                "--r",
                "2",
                "--a",
                "1/10",
                "--b",
                "9/10",
                "--out",
                name,
            ],
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    let v: Value = serde_json::from_slice(&a).unwrap();
    let res = crparam::charts::Resolution::from_json(&v).unwrap();
    assert_eq!(res.to_json(), v);
}

#[test]
fn decompose_disk_has_one_column_and_one_sector() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("disk.json"), DISK).unwrap();
    let out = crparam(
        dir.path(),
        &["decompose", "--in", "disk.json", "--out", "d.json"],
    );
    assert!(out.status.success());
    let v = json(&dir.path().join("d.json"));
    let cols = v["columns"].as_array().unwrap();
    assert_eq!(cols.len(), 1);
    let branches = cols[0]["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|b| b["kind"] == "branch")
        .count();
    assert_eq!(branches, 1);
    assert_eq!(v["slices"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_passes_on_the_unit_square() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sq.json"), SQUARE).unwrap();
    let out = crparam(
        dir.path(),
        &[
            "resolve2d",
            "--in",
            "sq.json",
            "--alpha",
            "0,1",
            "--n",
            "1",
            "--out",
            "res.json",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(json(&dir.path().join("res.json"))["chart_count"], 1);
    let out = crparam(
        dir.path(),
        &[
            "verify",
            "--res",
            "res.json",
            "--target",
            "sq.json",
            "--report",
            "rep.json",
            "--samples",
            "2000",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rep = json(&dir.path().join("rep.json"));
    assert!(rep["gates"]
        .as_array()
        .unwrap()
        .iter()
        .all(|g| g["passed"] == true));
}

#[test]
fn disk_resolution_report_samples() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("disk.json"), DISK).unwrap();
    let out = crparam(
        dir.path(),
        &[
            "resolve2d",
            "--in",
            "disk.json",
            "--alpha",
            "0,2",
            "--n",
            "20",
            "--out",
            "res.json",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = crparam(
        dir.path(),
        &[
            "report",
            "--res",
            "res.json",
            "--samples",
            "charts.csv",
            "--per-axis",
            "4",
        ],
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("charts.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("chart_id,t1,t2,x1,x2"));
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 5);
        let x: f64 = cells[3].parse().unwrap();
        let y: f64 = cells[4].parse().unwrap();
        assert!(x * x + y * y < 1.0 + 1e-12);
    }
}

#[test]
fn experiment_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = crparam(
        dir.path(),
        &[
            "experiment",
            "--degree",
            "2",
            "--r",
            "1",
            "--runs",
            "3",
            "--seed",
            "3",
            "--csv",
            "e.csv",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("e.csv")).unwrap();
    assert!(csv.starts_with("seed,degree,order,bucket,run,N,max_chart_degree,wall_ms\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("disk.json"), DISK).unwrap();
    let cases: [&[&str]; 5] = [
        &["resolve1d", "--poly", "x1^^2", "--r", "1"],
        &["resolve1d", "--poly", "3*x1", "--r", "1"],
        &[
            "resolve2d",
            "--in",
            "disk.json",
            "--alpha",
            "0,2",
            "--n",
            "2",
        ],
        &[
            "resolve2d",
            "--in",
            "disk.json",
            "--alpha",
            "2",
            "--n",
            "20",
        ],
        &["nonsense"],
    ];
    for args in cases {
        assert_eq!(crparam(dir.path(), args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn engine_failures_exit_with_two_and_leave_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = crparam(
        dir.path(),
        &[
            "resolve1d",
            "--poly",
            "x1^2",
            "--r",
            "3",
            "--max-rounds",
            "0",
            "--out",
            "res.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("res.json").exists());
    let diag = json(&dir.path().join("res.json.error.json"));
    assert_eq!(diag["status"], "failed");
}
