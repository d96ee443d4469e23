use std::path::Path;
use std::process::{Command, Output};

fn gmssc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmssc")).args(args).output().unwrap()
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn generate_run_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let out = gmssc(&[
        "generate", "--n", "6", "--anchors", "1,2", "--extra", "2", "--T", "25", "--seed", "4", "--out",
        inst.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&inst).unwrap()).unwrap();
    assert_eq!(doc["n"], 6);
    assert_eq!(doc["requests"].as_array().unwrap().len(), 25);

    let cfg = dir.path().join("exp.toml");
    write(
        &cfg,
        r#"
n = 6
T = 25
seeds = [0, 1]
epsilon = 0.1
output = "results.csv"

[generator]
kind = "file"
path = "inst.json"

[[algorithms]]
kind = "flt"

[[algorithms]]
kind = "brute"

[[algorithms]]
kind = "opgd-det"
solver = "exact"
"#,
    );
    let csv = dir.path().join("results.csv");
    let out = gmssc(&["run", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("algorithm,seed,t,cost,cum_cost,avg_cost\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 25);

    let out = gmssc(&["summarize", "--in", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.lines().any(|l| l.starts_with("brute,2,")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    write(&bad, "n = 0\n");
    assert_eq!(gmssc(&["run", "--config", bad.to_str().unwrap()]).status.code(), Some(1));

    let big = dir.path().join("big.toml");
    write(
        &big,
        r#"
n = 9
T = 5
seeds = [0]
epsilon = 0.1

[generator]
kind = "anchored"
anchors = [1]
extra = 1

[[algorithms]]
kind = "brute"
"#,
    );
    assert_eq!(gmssc(&["run", "--config", big.to_str().unwrap()]).status.code(), Some(2));

    let missing = dir.path().join("missing.toml");
    assert_eq!(gmssc(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(gmssc(&["summarize", "--in", missing.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(gmssc(&["generate", "--n", "3"]).status.code(), Some(1));
}
