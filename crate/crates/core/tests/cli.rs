mod common;

use std::process::Command;

use causal_calc::cli::{self, CmdOutput};
use causal_calc::io::load_model;
use serde_json::{json, Value as Json};

fn run(args: &[&str]) -> CmdOutput {
    cli::run(std::iter::once("causal-calc").chain(args.iter().copied()))
}

fn json_of(out: &CmdOutput) -> Json {
    assert_eq!(out.code, 0, "{}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

fn path(p: std::path::PathBuf) -> String {
    p.display().to_string()
}

fn x_values(tree: &Json) -> Vec<(u64, String)> {
    tree["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|n| {
            (
                n["depth"].as_u64().unwrap(),
                n["config"][0][1].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn run_counter_tree() {
    let out = run(&[
        "run",
        "--model",
        &path(common::model_path("counter")),
        "--init",
        "X=8",
        "--depth",
        "2",
    ]);
    let tree = json_of(&out);
    assert_eq!(tree["level_counts"], json!([1, 2, 3]));
    let xs: Vec<String> = x_values(&tree).into_iter().map(|(_, v)| v).collect();
    assert_eq!(xs, ["8", "0", "9", "0", "1", "9"]);
}

#[test]
fn intervene_standard_and_structure() {
    let counter = path(common::model_path("counter"));
    let tree = json_of(&run(&[
        "intervene",
        "--model",
        &counter,
        "--do",
        "X@0=9",
        "--depth",
        "3",
    ]));
    assert!(x_values(&tree).iter().all(|(_, v)| v == "9"));

    let one = path(common::model_path("constant1"));
    let tree = json_of(&run(&[
        "intervene",
        "--model",
        &one,
        "--init",
        "X=1",
        "--do-structure",
        "X@0(X=0)=0,X@0(X=1)=0",
        "--depth",
        "5",
    ]));
    for (d, v) in x_values(&tree) {
        assert_eq!(v, if d == 0 { "1" } else { "0" });
    }
}

#[test]
fn compile_then_accept_and_bisim() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = path(dir.path().join("parity.json"));
    let machine = path(common::machine_path("parity_lba"));
    let out = run(&["compile", "--machine", &machine, "--tape-len", "3", "-o", &out_path]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("9 variables"), "{}", out.stdout);
    let loaded = load_model(std::path::Path::new(&out_path)).unwrap();
    assert!(loaded.calculator.is_some());

    let out = run(&["accepts", "--model", &out_path, "--input", "11", "--via", "tsem"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.starts_with("tsem: ACCEPT"), "{}", out.stdout);

    let out = run(&[
        "accepts",
        "--machine",
        &machine,
        "--input",
        "100",
        "--tape-len",
        "3",
        "--via",
        "both",
    ]);
    assert_eq!(out.stdout.lines().last(), Some("agree"));
    assert!(out.stdout.contains("REJECT_EXHAUSTED"), "{}", out.stdout);

    let report = json_of(&run(&[
        "bisim",
        "--machine",
        &machine,
        "--input",
        "110",
        "--tape-len",
        "3",
        "--depth",
        "12",
    ]));
    assert_eq!(report["equivalent"], true);
    assert_eq!(report["counterexample"], Json::Null);
}

#[test]
fn accepts_alternation_input() {
    let machine = path(common::machine_path("alt_tm"));
    let out = run(&[
        "accepts",
        "--machine",
        &machine,
        "--input",
        "0101",
        "--via",
        "both",
        "--budget",
        "50",
    ]);
    assert_eq!(out.stdout, "direct: ACCEPT (step 5)\ntsem: ACCEPT (step 5)\nagree\n");
}

#[test]
fn cause_on_counter() {
    let counter = path(common::model_path("counter"));
    let v = json_of(&run(&[
        "cause",
        "--model",
        &counter,
        "--init",
        "X=8",
        "--candidate",
        "X@1=9",
        "--outcome",
        "X@2=9",
    ]));
    assert_eq!(v["is_cause"], true);
    assert_eq!(v["failing_condition"], Json::Null);
    let v = json_of(&run(&[
        "cause",
        "--model",
        &counter,
        "--init",
        "X=8",
        "--candidate",
        "X@1=0",
        "--outcome",
        "X@2=9",
    ]));
    assert_eq!(v["is_cause"], false);
    assert_eq!(v["failing_condition"], 1);
}

#[test]
fn validation_and_usage_errors_have_distinct_codes() {
    let counter = path(common::model_path("counter"));
    assert_eq!(
        run(&["run", "--model", "/nonexistent/model.json", "--init", "X=0"]).code,
        1
    );
    assert_eq!(run(&["frobnicate"]).code, 1);
    let dup = run(&["intervene", "--model", &counter, "--do", "X@1=2,X@1=3"]);
    assert_eq!(dup.code, 2, "{}", dup.stderr);
    assert_eq!(run(&["run", "--model", &counter, "--init", "X=12"]).code, 2);
}

#[test]
fn binary_honours_node_cap() {
    let bin = env!("CARGO_BIN_EXE_causal-calc");
    let counter = path(common::model_path("counter"));
    let out = Command::new(bin)
        .args(["run", "--model", &counter, "--init", "X=0", "--depth", "6"])
        .env("CAUSAL_CALC_NODE_CAP", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let tree: Json = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(tree["truncated"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("node budget"));

    let out = Command::new(bin)
        .args(["run", "--model", &counter, "--init", "X=0", "--depth", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
