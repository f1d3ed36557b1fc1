use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn cf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cf")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn validate_fgsw_passes() {
    let out = cf(&["validate", "--example", "fgsw", "--depth", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["schema"], "cf-forge/1");
    assert_eq!(v["validation"]["passed"], true);
    assert_eq!(v["validation"]["stages"].as_array().unwrap().len(), 8);
}

#[test]
fn factor_sum_mod4() {
    let out = cf(&["factor-sum", "--example", "fgsw", "--subgroup", "mod:4", "--depth", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let terms: Vec<&str> = v["verdict"]["terms"].as_array().unwrap().iter().map(|t| t.as_str().unwrap()).collect();
    let mut want = vec!["1/2", "1/2"];
    want.extend(["0/1"; 8]);
    assert_eq!(terms, want);
    assert_eq!(v["verdict"]["verdict"], "termwise_zero");
}

#[test]
fn exit_codes() {
    assert_eq!(cf(&["run", "missing.json"]).status.code(), Some(1));
    assert_eq!(cf(&["validate", "--example", "no-such-example"]).status.code(), Some(1));
    assert_eq!(cf(&["no-such-verb"]).status.code(), Some(1));
    assert_eq!(cf(&["--help"]).status.code(), Some(0));
    // F_0C_1 is not inside F_1
    let bad = scratch("bad.json");
    fs::write(&bad, r#"{"explicit": {"F": [[0], [0, 1]], "kappa": [[[0, "1/2"], [2, "1/2"]]], "nu": [[], [[0, "1/2"], [1, "1/2"]]]}}"#)
        .unwrap();
    assert_eq!(cf(&["validate", "--params", bad.to_str().unwrap(), "--depth", "1"]).status.code(), Some(2));
    assert_eq!(cf(&["haar", "--example", "heisenberg-rank-one", "-N", "40"]).status.code(), Some(3));
}

#[test]
fn run_config_matches_flags() {
    let config = scratch("factor.json");
    fs::write(&config, r#"{"command": "factor-sum", "example": "fgsw", "subgroup": ["mod:4"], "depth": 10}"#).unwrap();
    let a = cf(&["run", config.to_str().unwrap()]);
    let b = cf(&["factor-sum", "--example", "fgsw", "--subgroup", "mod:4", "--depth", "10"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let config = scratch("odometer.json");
    fs::write(&config, r#"{"command": "odometer", "action": "cross-sections", "chain": {"chain": "z_product", "a": [2, 3]}, "N": 2}"#)
        .unwrap();
    let out = cf(&["run", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["certified"], true);
}

#[test]
fn reports_are_deterministic() {
    let args = ["stack", "--example", "fgsw", "-N", "3", "--samples", "25", "--seed", "7"];
    let a = cf(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, cf(&args).stdout);
    let v = json_of(&a);
    assert_eq!(v["samples"]["agree"], 25);
    let other = cf(&["stack", "--example", "fgsw", "-N", "3", "--samples", "25", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn stack_writes_svg_and_json() {
    let svg = scratch("layout.svg");
    let layout = scratch("layout.json");
    let out = cf(&["stack", "--example", "fgsw", "-N", "4", "--svg", svg.to_str().unwrap(), "--json", layout.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<g class=\"stage\"").count(), 5);
    assert!(text.contains("data-start=\"0/1\""));
    let v: Value = serde_json::from_str(&fs::read_to_string(&layout).unwrap()).unwrap();
    assert_eq!(v["columns"][4]["total"], "31/16");
}

#[test]
fn odometer_verbs() {
    let out = cf(&["odometer", "cover", "--chain", "heisenberg-2adic-chain", "-N", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let out = cf(&["odometer", "act", "--chain", r#"{"chain": "z_product", "a": [2, 2, 2]}"#, "--g", "5"]);
    assert_eq!(json_of(&out)["indices"].as_array().unwrap().len(), 3);
    let out = cf(&[
        "odometer",
        "iso-check",
        "--example",
        "fgsw",
        "--chain",
        r#"{"chain": "z_product", "a": [2, 2, 2, 2]}"#,
        "--l-max",
        "4",
        "--m-max",
        "5",
    ]);
    assert_eq!(json_of(&out)["outcome"]["obstructed"]["envelope"], "1/4");
}

#[test]
fn example_catalog() {
    let v = json_of(&cf(&["example", "list"]));
    assert_eq!(v["examples"].as_array().unwrap().len(), 8);
    let v = json_of(&cf(&["example", "show", "s3-two-factors"]));
    assert_eq!(v["entry"]["partitions_differ"], true);
}
