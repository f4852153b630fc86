//! End-to-end runs of the `gcl-sim` binary and the library entry point.

use std::fs;
use std::path::Path;
use std::process::Command;

use gcl_expcli::{execute, FamilyName, RunRequest};

const BIN: &str = env!("CARGO_BIN_EXE_gcl-sim");

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).env("RUST_LOG", "error").output().unwrap()
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "experiment = \"ringdown\"\n[model]\ntheta_over_pi = 0.6\n");
    let out = run(&["run", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta"));
    let cfg = write(dir.path(), "ok.toml", "experiment = \"linear-response\"\n");
    let out = run(&["run", cfg.to_str().unwrap(), "--family", "lindblad"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["run", cfg.to_str().unwrap(), "--override", "model.kerr=0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_is_an_io_error() {
    let out = run(&["run", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn successful_run_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "lr.toml", "experiment = \"linear-response\"\n[sweep]\npoints = 11\n");
    let out = run(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--override", "output.stem=lr"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("lr.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "family,delta,omega,amplitude,phase");
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2 * 11);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("lr.json")).unwrap()).unwrap();
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["status"], "complete");
    assert_eq!(meta["config"]["model"]["gamma"], 0.5);
    assert!(meta["config"]["drive"]["f"].as_f64().unwrap() > 0.0);
    assert!(meta["wall_clock_s"].as_f64().is_some());
    assert!(!csv.contains("wall"));
}

fn request(dir: &Path, text: &str, threads: usize, stem: &str) -> String {
    let cfg = write(dir, &format!("{stem}.toml"), text);
    let req = RunRequest {
        config: cfg,
        out: Some(dir.to_path_buf()),
        threads,
        family: None,
        overrides: vec![format!("output.stem = \"{stem}\"")],
    };
    let files = execute(&req).unwrap();
    fs::read_to_string(files.csv).unwrap()
}

#[test]
fn identical_configs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = "experiment = \"bistability\"\n[sweep]\npoints = 9\n[hysteresis]\ndwell_periods = 60\n";
    let a = request(dir.path(), text, 1, "a");
    let b = request(dir.path(), text, 1, "b");
    let c = request(dir.path(), text, 3, "c");
    let strip = |s: &str| s.lines().filter(|l| !l.contains(".json")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(strip(&a), strip(&c));
}

#[test]
fn quantum_run_is_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let text = "experiment = \"fluctuations\"\n[numerics]\ndim = 12\nsnapshots = 20\n[sweep]\npoints = 3\n";
    let a = request(dir.path(), text, 1, "q1");
    let b = request(dir.path(), text, 2, "q2");
    let strip = |s: &str| s.lines().filter(|l| !l.contains(".json")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.lines().filter(|l| l.starts_with("CL,") || l.starts_with("gCL,")).count(), 6);
}

#[test]
fn family_flag_restricts_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "pop.toml", "experiment = \"populations\"\n[numerics]\ndim = 14\n");
    let req = RunRequest {
        config: cfg,
        out: Some(dir.path().to_path_buf()),
        threads: 1,
        family: Some(FamilyName::Lindblad),
        overrides: Vec::new(),
    };
    let files = execute(&req).unwrap();
    let csv = fs::read_to_string(files.csv).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 14 - gcl_core::observables::TRUNCATION_GUARD);
    assert!(rows.iter().all(|r| r.starts_with("lindblad,")));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(files.json).unwrap()).unwrap();
    assert!(meta["diagnostics"]["families"]["lindblad"]["t_eff"].as_f64().unwrap() > 0.0);
}
