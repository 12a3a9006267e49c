use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn nwslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nwslab")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn claims_emit_sorted_ndjson() {
    let text = stdout(&nwslab(&["claims", "--param", "grid.n_points=64", "--param", "grid.length=16"]));
    let reports: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(reports.len(), 10);
    let ids: Vec<&str> = reports.iter().map(|r| r["claim_id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort_unstable();
    assert_eq!(ids, sorted);
    for r in &reports {
        for key in ["paper_ref", "residual", "error_estimate", "verdict", "metadata"] {
            assert!(r.get(key).is_some(), "{key} missing in {r}");
        }
        assert_eq!(r["metadata"]["grid"]["n_points"], 64);
    }
}

#[test]
fn config_file_and_report_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let report = dir.path().join("report.ndjson");
    fs::write(&cfg, format!("# linear limit\nepsilon = 0\ngrid.n_points = 64\nout.report_path = {}\n", report.display()))
        .unwrap();
    let out = nwslab(&["claims", "--config", cfg.to_str().unwrap()]);
    assert!(stdout(&out).is_empty());
    let text = fs::read_to_string(report).unwrap();
    let fujita: Value = text.lines().map(|l| serde_json::from_str::<Value>(l).unwrap()).find(|r| r["claim_id"] == "fujita_zero").unwrap();
    assert_eq!(fujita["metadata"]["params"]["epsilon"], 0.0);
    assert_eq!(fujita["verdict"], "SUPPORTED");
}

#[test]
fn malformed_config_fails_before_running() {
    let out = nwslab(&["claims", "--param", "time.dt=0"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("time.dt"));
    assert!(!nwslab(&["claims", "--param", "no_such_key=1"]).status.success());
    assert!(!nwslab(&["claims", "--config", "/nonexistent/cfg"]).status.success());
}

#[test]
fn sweep_writes_into_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let path = stdout(&nwslab(&["sweep", "F_of_s", "--out", out_dir, "--param", "grid.n_points=32"]));
    let text = fs::read_to_string(path.trim()).unwrap();
    assert!(text.starts_with("s,t,F,error_estimate\n"));
    assert_eq!(text.lines().count(), 1 + 32 * 3);
    assert!(!nwslab(&["sweep", "bogus"]).status.success());
}

#[test]
fn simulate_reports_blow_up() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let quiet: Value = serde_json::from_str(&stdout(&nwslab(&["simulate", "--out", out_dir, "--param", "grid.n_points=64"]))).unwrap();
    assert!(quiet["blow_up"].is_null());
    assert_eq!(quiet["records"], 101);
    assert!(dir.path().join("trajectory.csv").exists());

    let args = ["simulate", "--out", out_dir, "--param", "init.kind=constant", "--param", "init.amplitude=5", "--param", "time.t_end=2"];
    let loud: Value = serde_json::from_str(&stdout(&nwslab(&args))).unwrap();
    assert!(loud["blow_up"].as_f64().unwrap() < 0.3);
}

#[test]
fn kernel_point_and_table() {
    let v: Value = serde_json::from_str(&stdout(&nwslab(&["kernel", "--t", "1", "--x", "0", "--s", "0"]))).unwrap();
    let g = v["heat_kernel"].as_f64().unwrap();
    assert!((g - 1.0 / (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    assert_eq!(v["spectral_kernel"], 1.0);
    let table = stdout(&nwslab(&["kernel", "--param", "grid.n_points=16"]));
    assert_eq!(table.lines().count(), 17);
    assert!(!nwslab(&["kernel", "--t", "0", "--x", "1"]).status.success());
}

#[test]
fn invert_prints_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let v: Value = serde_json::from_str(&stdout(&nwslab(&["invert", "--out", out_dir, "--param", "grid.n_points=64"]))).unwrap();
    assert_eq!(v["claim_id"], "null_inverse_transform");
    assert!(dir.path().join("u_of_x.csv").exists());
    // the closed form needs n = 2
    assert!(!nwslab(&["invert", "--param", "n=3"]).status.success());
}
