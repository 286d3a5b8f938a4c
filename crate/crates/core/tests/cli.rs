//! End-to-end checks of the `radgas` binary: subcommand contracts, exit
//! codes, machine-readable errors, and byte-level determinism of outputs.

use std::fs;
use std::process::Command;

fn radgas() -> Command {
    Command::new(env!("CARGO_BIN_EXE_radgas"))
}

fn write_quick_config(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("quick_case2.json");
    fs::write(
        &path,
        r#"{
  "case_id": 2,
  "u_minus": -0.4472135954999579,
  "u_plus": 0.0,
  "L": 100.0,
  "n_points": 1001,
  "cfl": 0.45,
  "t_final": 5.0,
  "perturbation": {
    "shape": "cosine_bump",
    "amplitude": 0.01,
    "center": 30.0,
    "width": 5.0
  },
  "sample_times": [1.0, 2.5, 5.0]
}"#,
    )
    .unwrap();
    path
}

#[test]
fn coeffs_table_ends_with_expected_line() {
    let out = radgas().args(["coeffs", "5"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().last().unwrap(), "a5 = 4284·√2");
    assert!(text.lines().count() == 5);
}

#[test]
fn coeffs_rejects_out_of_range_order() {
    let out = radgas().args(["coeffs", "40"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(err["kind"], "config");
}

#[test]
fn run_produces_csv_and_summary_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_quick_config(dir.path());
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let st = radgas()
            .args(["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        // a 5-unit run does not reach the decay thresholds; exit 1 expected
        assert_eq!(st.status.code(), Some(1));
    }
    let csv1 = fs::read(out1.join("quick_case2_series.csv")).unwrap();
    let csv2 = fs::read(out2.join("quick_case2_series.csv")).unwrap();
    assert!(!csv1.is_empty());
    assert_eq!(csv1, csv2, "identical config must give byte-identical CSV");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out1.join("quick_case2_summary.json")).unwrap())
            .unwrap();
    assert!(summary["checks"]["sup_w_ratio"].is_number());
    assert_eq!(summary["passed"], false);

    // the series CSV has a header plus one row per sample time (incl. t=0)
    let text = String::from_utf8(csv1).unwrap();
    assert!(text.starts_with("t,"));
    assert_eq!(text.lines().count(), 1 + 4);
}

#[test]
fn run_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_quick_config(dir.path());
    let out = dir.path().join("o");
    let st = radgas()
        .args([
            "run",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--set",
            "t_final=2.0",
            "--set",
            "perturbation.amplitude=0.005",
        ])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(1));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("quick_case2_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["config"]["t_final"], 2.0);
    assert_eq!(summary["config"]["perturbation"]["amplitude"], 0.005);
}

#[test]
fn bad_config_gives_json_error_and_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing.json");
    let st = radgas()
        .args(["run", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8(st.stderr).unwrap().trim()).unwrap();
    assert_eq!(err["kind"], "config");
}

#[test]
fn case_mismatch_is_a_scenario_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_quick_config(dir.path());
    let st = radgas()
        .args([
            "run",
            config.to_str().unwrap(),
            "--out",
            dir.path().join("x").to_str().unwrap(),
            "--set",
            "case_id=1",
        ])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8(st.stderr).unwrap().trim()).unwrap();
    assert_eq!(err["kind"], "scenario");
}

#[test]
fn verify_elliptic_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let st = radgas()
        .args(["verify-elliptic", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stdout));
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("verify_elliptic.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 7);
}
