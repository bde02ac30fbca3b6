use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn qexplore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qexplore")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_analyze_export() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("toy-digital.cfg");
    let out = qexplore(&["sweep", "--config", s(&cfg), "--out", s(dir.path()), "--budget-episodes", "12", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 4);
    assert!(stdout.contains("ga-3.2ns: 12 records"));
    assert!(dir.path().join("sweep.csv").exists());

    let out = qexplore(&["analyze", s(dir.path())]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("success fraction"));
    assert!(dir.path().join("sd-3.2ns/learning_curve.csv").exists());

    let out = qexplore(&["export", "--out", s(dir.path())]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
    let summary = fs::read_to_string(dir.path().join("ga-3.2ns/summary.json")).unwrap();
    assert!(summary.contains("\"master_seed\": 5"));
}

#[test]
fn single_run_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(preset("toy-pwc.cfg")).unwrap() + "\n[alphazero.network]\nwidth = 16\n";
    let cfg = dir.path().join("small.cfg");
    fs::write(&cfg, text).unwrap();
    let out_dir = dir.path().join("out");
    let out = qexplore(&["run", "--config", s(&cfg), "--out", s(&out_dir), "--budget-episodes", "3", "--workers", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = fs::read_to_string(out_dir.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 2 + 3);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "task = 'pwc'\noptimizers = ['alphazero']\ndurations_ns = [20.0]\n[budget]\nepisodes = 5\n[grape]\nmemroy = 3\n").unwrap();
    let out = qexplore(&["run", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grape.memroy"));

    let out = qexplore(&["run", "--config", s(&preset("toy-pwc.cfg")), "--budget-episodes", "0", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));

    let out = qexplore(&["run", "--config", s(&preset("toy-pwc.cfg")), "--budget-seconds", "1", "--budget-episodes", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qexplore(&["run", "--config", s(&dir.path().join("missing.cfg"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn foreign_output_directory_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("toy-digital.cfg");
    let out = qexplore(&["sweep", "--config", s(&cfg), "--out", s(dir.path()), "--budget-episodes", "4"]);
    assert!(out.status.success());
    let out = qexplore(&["sweep", "--config", s(&cfg), "--out", s(dir.path()), "--budget-episodes", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refusing to reuse"));
}
