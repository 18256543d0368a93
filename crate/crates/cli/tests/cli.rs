use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn collide(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collide")).args(args).env("RUST_LOG", "warn").output().expect("spawn collide")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = "n_levels = 8\n[ga]\npopulation = 16\nelites = 8\ngenerations = 50\n";

#[test]
fn run_then_plots() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "t.toml", SMALL);
    let out = dir.path().join("res/run");
    let o = collide(&["run", &config, "--seed", "4", "--generations", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["generations"], 3);
    assert!(out.join("summary.json").exists() && out.join("trace.jsonl").exists());
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 4);
    assert_eq!(summary["final_fitness"], report["final_fitness"]);

    let o = collide(&["plots", dir.path().join("res").to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["runs"], 1);
    assert!(report["files"].as_array().unwrap().len() >= 3);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "t.toml",
        &format!("family = \"coherent\"\nseed = 2\n{SMALL}").replace("n_levels = 8", "n_levels = 12"),
    );
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let o = collide(&["--threads", threads, "run", &config, "--generations", "4", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let mut s: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        s["wall_clock_s"] = Value::Null;
        s["config"]["output"] = Value::Null;
        reports.push(s);
        assert_eq!(fs::read(out.join("trace.jsonl")).unwrap(), fs::read(dir.path().join("1/trace.jsonl")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn baseline_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let config =
        write_config(dir.path(), "b.toml", "family = \"baseline_only\"\nn_levels = 10\n[timing]\nt_c = 0.1\nn = 20\n");
    let out = dir.path().join("b");
    let o = collide(&["baseline", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["n"], 20);

    let config = write_config(
        dir.path(),
        "s.toml",
        "family = \"coherent\"\nn_levels = 12\n[target]\nalpha = [0.5, 0.0]\n[sweep]\npoints = 9\ntotal_time = 1.0\nt_c = 0.1\n",
    );
    let out = dir.path().join("s");
    let o = collide(&["sweep-chi", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["points"], 9);
    assert!(out.join("sweep.json").exists());
}

#[test]
fn failures_emit_an_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.toml", "[timing]\nt_c = 0.1\ntotal_time = 5.0\n");
    let o = collide(&["run", &config]);
    assert!(!o.status.success());
    let err: Value =
        serde_json::from_slice(o.stderr.split(|&b| b == b'\n').find(|l| l.starts_with(b"{")).unwrap()).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("not both"));

    let o = collide(&["run", dir.path().join("missing.toml").to_str().unwrap()]);
    assert!(!o.status.success());
    let err: Value =
        serde_json::from_slice(o.stderr.split(|&b| b == b'\n').find(|l| l.starts_with(b"{")).unwrap()).unwrap();
    assert_eq!(err["error"], "io");
}
