use std::process::Command;

use uaosc::harness::table::{read_file, ConvergenceRow, OrderRow, TraceRow};
use uaosc::harness::StudyConfig;

fn uaosc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uaosc"))
}

#[test]
fn config_echo_parses_back() {
    let out = uaosc()
        .args(["config", "--N=24", "--eps=1,1e-3", "--scheme=ua1", "--P=0.1,-0.4"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let cfg = StudyConfig::parse(&text).unwrap();
    assert_eq!(cfg.n, vec![24]);
    assert_eq!(cfg.eps, vec![1.0, 1e-3]);
    assert_eq!(cfg.method.to_string(), "ua1");
    assert_eq!(cfg.detector, (0.1, -0.4));
}

#[test]
fn config_file_then_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "N = 32\nt_fin = 0.5 # comment\n").unwrap();
    let out = uaosc()
        .args(["config", "-c", path.to_str().unwrap(), "--N=16"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let cfg = StudyConfig::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.n, vec![16]);
    assert_eq!(cfg.t_fin, 0.5);
}

#[test]
fn bad_key_fails_with_message() {
    let out = uaosc().args(["config", "--nope=1"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn run_writes_trace_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let out = uaosc()
        .args(["run", "--N=20", "--eps=0.1", "--dt=0.01", "--t_fin=0.05", "--y0=-0.5"])
        .arg(format!("--output={}", csv.display()))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<TraceRow> = read_file(&csv).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].t, 0.0);
    assert!((rows[5].t - 0.05).abs() < 1e-15);
    assert!(rows.iter().all(|r| r.value.is_finite()));
}

#[test]
fn converge_time_writes_rows_and_orders() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("time.csv");
    let out = uaosc()
        .args([
            "converge-time",
            "--N=16",
            "--N_ref=16",
            "--eps=0.1",
            "--dt=0.02,0.01",
            "--dt_ref=1e-3",
            "--t_fin=0.04",
            "--y0=-1",
        ])
        .arg(format!("--output={}", csv.display()))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<ConvergenceRow> = read_file(&csv).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.error > 0.0 && r.n == 16));
    let orders: Vec<OrderRow> = read_file(&dir.path().join("time_orders.csv")).unwrap();
    assert_eq!(orders.len(), 1);
    assert!(orders[0].order.is_finite());
}
