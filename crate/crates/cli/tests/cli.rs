use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covercount"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covercount"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn without_metadata(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("metadata");
    v
}

#[test]
fn predict_examples() {
    let out = run(&["predict", "--b", "6", "--mu", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["c"], 2);
    assert_eq!(v["metadata"]["version"], env!("CARGO_PKG_VERSION"));

    assert_eq!(json(&run(&["predict", "--b", "4", "--mu", "4"]))["c"], 1);
    assert_eq!(
        json(&run(&["predict", "--b", "3", "--mu", "3", "--j", "1,1,1"]))["c"],
        3
    );

    let bad = run(&["predict", "--b", "6", "--mu", "4"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("does not divide"));
    assert_eq!(run(&["predict", "--b", "6"]).status.code(), Some(2));
}

#[test]
fn carnot_examples() {
    let v = json(&run(&["carnot", "--mu", "3", "--j", "1,1,1", "--d", "1"]));
    assert_eq!(v["exists"], true);
    let v = json(&run(&["carnot", "--mu", "3", "--j", "1,1,3", "--d", "1"]));
    assert_eq!(v["exists"], false);
}

#[test]
fn compute_family_member() {
    let out = run(&["compute", "--b", "4", "--mu", "2", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["c"], 2);
    assert_eq!(v["method_agreement"], true);
    assert_eq!(v["metadata"]["seed"], 1);
    assert!(v["metadata"]["engine"]["tracking"]["residual_tol"].is_number());
    assert_eq!(v["offsets"].as_array().unwrap().len(), 3);
}

#[test]
fn compute_from_config_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tri.json");
    let report = dir.path().join("report.json");
    let config_s = config.to_str().unwrap();
    let out = run(&[
        "export", "--family", "fermat", "--mu", "3", "--j", "1,1,1", "--out", config_s,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&config).unwrap()).unwrap();
    assert_eq!(file["schema"], 1);

    let out = run(&[
        "compute",
        "--config",
        config_s,
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["c"], 3);
}

#[test]
fn config_round_trip_gives_identical_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("b42.json");
    let config_s = config.to_str().unwrap();
    run(&[
        "export", "--b", "4", "--mu", "2", "--seed", "5", "--out", config_s,
    ]);
    let direct = json(&run(&["compute", "--b", "4", "--mu", "2", "--seed", "5"]));
    let loaded = json(&run(&["compute", "--config", config_s, "--seed", "5"]));
    assert_eq!(without_metadata(direct), without_metadata(loaded));
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, "{\"schema\": 1, ").unwrap();
    let out = run(&["compute", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["compute", "--config", "/nonexistent/file.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zariski_examples() {
    let v = json(&run(&["zariski", "--b", "6"]));
    assert_eq!(v["entries"].as_array().unwrap().len(), 3);
    assert_eq!(v["distinct"], true);
    let v = json(&run(&["zariski", "--b", "4"]));
    assert_eq!(v["entries"].as_array().unwrap().len(), 2);
    assert_eq!(v["distinct"], true);
    let out = run(&["zariski", "--b", "7"]);
    let v = json(&out);
    assert_eq!(v["entries"].as_array().unwrap().len(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no pair at this degree"));
}

#[test]
fn verify_matrix() {
    let out = run(&["verify", "--b", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["all_agree"], true);

    let v = json(&run(&["verify", "--b", "4", "--seeds", "0,1,2"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert_eq!(v["all_agree"], true);

    assert_eq!(run(&["verify", "--b", "13"]).status.code(), Some(2));
}

#[test]
fn injected_fault_fails_verify() {
    let out = run(&["verify", "--b", "4", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["all_agree"], false);
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["compute", "--b", "6", "--mu", "3", "--seed", "2"];
    let one = run_env(&args, "COVERCOUNT_THREADS", "1");
    let many = run_env(&args, "COVERCOUNT_THREADS", "4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(one.stdout, run(&args).stdout);
    assert_eq!(
        run_env(&args, "COVERCOUNT_THREADS", "0").status.code(),
        Some(2)
    );
}
