//! End-to-end runs of the compiled binary: exit codes, artifacts, and the
//! seed environment override.

use std::fs;
use std::path::Path;
use std::process::Command;

use cppweave_core::fixtures;
use cppweave_core::format;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cppweave"))
}

fn write_instance(dir: &Path, seed: u64) -> (String, String) {
    let (t, demands) = fixtures::random_instance(seed, 6..=9, 3..=5);
    let tp = dir.join("net.txt");
    let dp = dir.join("demands.txt");
    fs::write(&tp, format::topology_to_text(&t)).unwrap();
    fs::write(&dp, format::demands_to_text(&demands)).unwrap();
    (
        tp.to_string_lossy().into_owned(),
        dp.to_string_lossy().into_owned(),
    )
}

#[test]
fn passing_run_exits_zero_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (tp, dp) = write_instance(dir.path(), 1);
    let out = bin()
        .args([
            "all",
            "--topology",
            &tp,
            "--demands",
            &dp,
            "--mode",
            "strict",
            "--seed",
            "5",
            "--out",
        ])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("verification: PASS"), "{stdout}");
    assert!(stdout.contains("extra capacity"), "{stdout}");
    assert!(dir.path().join("out/report.json").exists());
    assert!(dir.path().join("out/topology.dot").exists());
}

#[test]
fn missing_file_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let (_tp, dp) = write_instance(dir.path(), 1);
    let out = bin()
        .args(["all", "--topology", "does-not-exist.txt", "--demands", &dp, "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn malformed_topology_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let tp = dir.path().join("bad.txt");
    fs::write(&tp, "node A\nlink oops\n").unwrap();
    let (_tp2, dp) = write_instance(dir.path(), 1);
    let out = bin()
        .args(["solve", "--topology"])
        .arg(&tp)
        .args(["--demands", &dp, "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn bridge_demand_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let tp = dir.path().join("net.txt");
    let dp = dir.path().join("demands.txt");
    fs::write(&tp, "node A\nnode B\nnode C\nlink 1 A B 1\nlink 2 B C 1\n").unwrap();
    fs::write(&dp, "demand 1 A C\n").unwrap();
    let out = bin()
        .args(["all", "--topology"])
        .arg(&tp)
        .args(["--demands"])
        .arg(&dp)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn env_seed_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let (tp, dp) = write_instance(dir.path(), 2);
    let run = |out_dir: &str, seed_flag: &str, env: Option<&str>| {
        let mut cmd = bin();
        cmd.args([
            "convert",
            "--topology",
            &tp,
            "--demands",
            &dp,
            "--seed",
            seed_flag,
            "--out",
        ])
        .arg(dir.path().join(out_dir));
        match env {
            Some(v) => cmd.env("CPPWEAVE_SEED", v),
            None => cmd.env_remove("CPPWEAVE_SEED"),
        };
        assert!(cmd.status().unwrap().success());
        fs::read_to_string(dir.path().join(out_dir).join("trails.json")).unwrap()
    };
    let flag_17 = run("a", "17", None);
    let env_17 = run("b", "99", Some("17"));
    assert_eq!(flag_17, env_17, "env seed should override the flag");
}

#[test]
fn invalid_env_seed_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let (tp, dp) = write_instance(dir.path(), 2);
    let out = bin()
        .args(["solve", "--topology", &tp, "--demands", &dp, "--out"])
        .arg(dir.path().join("out"))
        .env("CPPWEAVE_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}
