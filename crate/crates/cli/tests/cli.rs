use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gitstab"))
        .args(args)
        .arg("--no-timestamp")
        .env("GITSTAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn result(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).expect("JSON report");
    v["result"].clone()
}

#[test]
fn check_two_lines() {
    let out = run(&["check", &data("two_lines.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = result(&out);
    assert_eq!(r["status"], "StrictlySemistable");
    assert_eq!(r["certificate"]["kind"], "Equality");
    assert_eq!(r["decomposition"].as_array().unwrap().len(), 2);
}

#[test]
fn expect_mismatch_exits_one() {
    let out = run(&["check", &data("single_line.json"), "--expect", "Stable"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(result(&out)["status"], "Unstable");
    let ok = run(&["check", &data("two_lines.json"), "--expect", "Polystable"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn input_errors_exit_two() {
    let out = run(&["check", &data("zero_weight.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("items[0].weight"));
    let out = run(&["check", &data("long_vector.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["check", "no/such/file.json"]).status.code(), Some(2));
    assert_eq!(
        run(&["check", &data("two_lines.json"), "--tol", "abc"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["check", &data("two_lines.json"), "--bogus"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn certificate_feeds_back_through_extra_h() {
    let first = run(&["check", &data("single_line.json")]);
    let dir = std::env::temp_dir().join(format!("gitstab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cert = dir.join("verdict.json");
    std::fs::write(&cert, serde_json::to_string(&result(&first)).unwrap()).unwrap();
    let again = run(&[
        "check",
        &data("single_line.json"),
        "--extra-h",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(result(&again)["certificate"], result(&first)["certificate"]);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn filtrations() {
    let hn = result(&run(&["hn", &data("single_line.json")]));
    assert_eq!(hn["slopes"], serde_json::json!(["1", "0"]));
    let jh = result(&run(&["jh", &data("two_lines.json")]));
    assert_eq!(jh["slopes"], serde_json::json!(["1", "1"]));
    assert_eq!(
        run(&["jh", &data("single_line.json")]).status.code(),
        Some(2)
    );
}

#[test]
fn balance_and_bundle() {
    let b = result(&run(&["balance", &data("three_lines.json")]));
    assert_eq!(b["status"], "Balanced");
    let u = result(&run(&["balance", &data("single_line.json")]));
    assert_eq!(u["status"], "Diverged");
    assert_eq!(u["exact_hints"][0]["mu"], "1");
    let bb = result(&run(&["bundle-balance", &data("bundle.json")]));
    assert_eq!(bb["status"], "Balanced");
    assert_eq!(bb["unique"], true);
}

#[test]
fn correspondence_commands() {
    let gm = result(&run(&["gm", &data("three_lines.json")]));
    assert_eq!(gm["blocks"], serde_json::json!([1, 1, 1]));
    let gale = result(&run(&["gale", &data("three_lines.json")]));
    assert_eq!(gale["config"]["n"], 1);
    let yes = result(&run(&[
        "orbit-eq",
        &data("three_lines.json"),
        &data("three_lines_moved.json"),
    ]));
    assert_eq!(yes["answer"], "Yes");
}

#[test]
fn tensor_of_filtration_families() {
    let t = result(&run(&[
        "tensor",
        &data("filt_a.json"),
        &data("filt_b.json"),
    ]));
    assert_eq!(t["filtration"]["n"], 4);
    assert!(t["verdict"]["status"] != "Unstable");
}

#[test]
fn cone_membership() {
    let r = result(&run(&[
        "cone",
        "--n",
        "4",
        "--k",
        "2,2,2",
        "--weights",
        "1,1,1",
    ]));
    assert_eq!(r["membership"], "Interior");
    assert_eq!(r["x"], serde_json::json!(["2/3", "2/3", "2/3"]));
    assert_eq!(
        run(&["cone", "--n", "4", "--k", "2,x"]).status.code(),
        Some(2)
    );
}

#[test]
fn probe_is_byte_identical() {
    let args = [
        "probe", "--trials", "10", "--seed", "7", "--n", "4", "--k", "2,2,2",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(result(&a)["soundness_violations"], 0);
}

#[test]
fn corpus_passes() {
    let out = run(&["corpus"]);
    assert_eq!(out.status.code(), Some(0));
    let r = result(&out);
    assert_eq!(r["passed"], r["total"]);
}
