//! End-to-end runs of the `lsp-probe` binary.

use std::fs;
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lsp-probe"));
    c.env_remove("LSP_PROBE_LOG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ledger_lines(dir: &Path) -> usize {
    fs::read_to_string(dir.join("transcripts.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .count()
}

fn run_config(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("run_config.json")).unwrap()).unwrap()
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "trials = 150\nseed = 5\n").unwrap();
    let out = tmp.path().join("run");
    let o = run(&[
        "yesno", "--config", cfg.to_str().unwrap(), "--trials", "200",
        "--agent", "always-no", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rc = run_config(&out);
    assert_eq!(rc["trials"], 200);
    assert_eq!(rc["seed"], 5);
    assert_eq!(ledger_lines(&out), 200);
}

#[test]
fn invalid_range_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["number", "--n", "1", "--out", tmp.path().join("r").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n"));
    assert!(!tmp.path().join("r").join("transcripts.jsonl").exists());
}

#[test]
fn interrupted_run_resumes_remaining_trials() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let out_s = out.to_str().unwrap();
    let base = ["yesno", "--agent", "perfect-lsp", "--trials", "200", "--seed", "3", "--out", out_s];

    let mut first: Vec<&str> = base.to_vec();
    first.extend(["--max-new-trials", "120"]);
    let o = run(&first);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--resume"));
    assert_eq!(ledger_lines(&out), 120);
    assert!(!out.join("summary.json").exists());

    // Without --resume an existing ledger is refused.
    assert_eq!(run(&base).status.code(), Some(2));

    let mut second: Vec<&str> = base.to_vec();
    second.push("--resume");
    let o = run(&second);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(ledger_lines(&out), 200);
    let metrics: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(metrics["pass_rate"], 100.0);

    let fresh = tmp.path().join("fresh");
    let mut straight: Vec<&str> = base[..base.len() - 1].to_vec();
    straight.push(fresh.to_str().unwrap());
    assert!(run(&straight).status.success());
    for f in ["summary.json", "transcripts.jsonl"] {
        assert_eq!(
            fs::read(out.join(f)).unwrap(),
            fs::read(fresh.join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn unreachable_endpoint_fails_without_losing_records() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let url = format!("http://127.0.0.1:{port}/v1");
    let o = bin()
        .env("LSP_PROBE_CLI_KEY", "sk-test")
        .args([
            "number", "--agent", "remote", "--endpoint", &url, "--model", "m",
            "--api-key-env", "LSP_PROBE_CLI_KEY", "--retry-limit", "0",
            "--n", "3", "--trials", "2", "--out", out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert!(out.join("run_config.json").exists());
    assert!(out.join("transcripts.jsonl").exists());
    assert!(!out.join("summary.json").exists());
}

#[test]
fn verify_small_range_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = run(&["verify", "--number-range", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("verification.json")).unwrap()).unwrap();
    assert_eq!(v["violation_count"], 0);
}

#[test]
fn report_rebuilds_identical_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("m");
    let o = run(&[
        "mentalism", "--agent", "perfect-lsp", "--trials", "30", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let before = fs::read(out.join("summary.json")).unwrap();
    fs::remove_file(out.join("summary.json")).unwrap();
    fs::remove_file(out.join("isr.csv")).unwrap();
    let o = run(&["report", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(out.join("summary.json")).unwrap(), before);
    assert!(out.join("isr.csv").exists());
}

#[test]
fn game_specific_agent_rejected_elsewhere() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "mentalism", "--agent", "biased-seven", "--out", tmp.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
