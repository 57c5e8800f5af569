//! Drives the `wqei` binary end to end and checks its exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn wqei(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wqei")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// A small synthetic dataset with its config.
fn dataset(dir: &Path) -> PathBuf {
    let d = dir.to_str().unwrap();
    let out = wqei(&["synth", "--dir", d, "--seed", "7", "--scenes", "7", "--pond-count", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("wqei.conf")
}

/// Rewrites `key` in the config at `conf`, appending it when absent.
fn set_key(conf: &Path, key: &str, value: &str) {
    let text = std::fs::read_to_string(conf).unwrap();
    let mut lines: Vec<String> = text
        .lines()
        .filter(|l| l.split('=').next().map(str::trim) != Some(key))
        .map(String::from)
        .collect();
    lines.push(format!("{key} = {value}"));
    std::fs::write(conf, lines.join("\n") + "\n").unwrap();
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&wqei(&["--help"])), 0);
    assert_eq!(code(&wqei(&["--version"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&wqei(&["frobnicate"])), 1);
    assert_eq!(code(&wqei(&["run"])), 1);
    assert_eq!(code(&wqei(&["run", "--config", "/nonexistent/wqei.conf"])), 1);

    let dir = tempfile::tempdir().unwrap();
    let conf = dataset(dir.path());
    let c = conf.to_str().unwrap();
    assert_eq!(code(&wqei(&["report", "--config", c, "--ponds", "NOPE"])), 1);

    set_key(&conf, "mystery.key", "1");
    assert_eq!(code(&wqei(&["ingest", "--config", c])), 1);
}

#[test]
fn remote_source_is_an_ingest_failure() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dataset(dir.path());
    set_key(&conf, "scene_source", "remote:landsat");
    assert_eq!(code(&wqei(&["ingest", "--config", conf.to_str().unwrap()])), 2);
}

#[test]
fn index_without_catalog_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dataset(dir.path());
    assert_eq!(code(&wqei(&["index", "--config", conf.to_str().unwrap()])), 3);
}

#[test]
fn unmet_min_samples_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dataset(dir.path());
    set_key(&conf, "calibrate.min_samples", "1000");
    let c = conf.to_str().unwrap();
    assert_eq!(code(&wqei(&["ingest", "--config", c])), 0);
    assert_eq!(code(&wqei(&["index", "--config", c])), 0);
    assert_eq!(code(&wqei(&["calibrate", "--config", c])), 4);
}

#[test]
fn staged_commands_produce_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dataset(dir.path());
    let c = conf.to_str().unwrap();
    let out_dir = dir.path().join("elsewhere");
    let o = out_dir.to_str().unwrap();
    for stage in ["ingest", "index", "calibrate"] {
        let out = wqei(&[stage, "--config", c, "--out", o]);
        assert_eq!(code(&out), 0, "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = wqei(&["report", "--config", c, "--out", o, "--ponds", "P01,P02"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let run_dir = PathBuf::from(String::from_utf8(out.stdout).unwrap().trim());
    assert!(run_dir.starts_with(&out_dir));
    assert!(run_dir.join("run.txt").is_file());
    assert!(run_dir.join("tables/rho.csv").is_file());
    assert!(run_dir.join("tables/WQEI_T_turbidity.csv").is_file());
    assert!(run_dir.join("ponds/P01/timeseries.csv").is_file());
    assert!(!run_dir.join("ponds/P03").exists());
}

#[test]
fn run_matches_staged_commands() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dataset(dir.path());
    let c = conf.to_str().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&wqei(&["run", "--config", c, "--out", a.to_str().unwrap()])), 0);
    for stage in ["ingest", "index", "calibrate", "report"] {
        assert_eq!(code(&wqei(&[stage, "--config", c, "--out", b.to_str().unwrap()])), 0);
    }
    let ra = a.join("report/run-7/run.txt");
    let rb = b.join("report/run-7/run.txt");
    assert_eq!(std::fs::read(ra).unwrap(), std::fs::read(rb).unwrap());
}
