//! Runs the compiled binary end to end.

use std::process::Command;

fn schreier(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_schreier")).args(args).env_remove("SCHREIER_BUDGET").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn family_contains_prints_json() {
    let (code, out) = schreier(&["family", "contains", "--fam", "S(1)", "--set", "3,5,9"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["result"], true);
    assert_eq!(doc["schema"], "v1");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(schreier(&["norm", "eval", "--space", "l2"]).0, 2);
    assert_eq!(schreier(&["norm", "eval", "--space", "nonsense", "--vector", "1:1"]).0, 2);
}

#[test]
fn selftest_subset_passes_and_is_stable() {
    let args = ["--seed", "3", "--format", "csv", "selftest", "--only", "1,2,3,10"];
    let (code, out) = schreier(&args);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().skip(1).all(|l| l.contains(",pass,")));
}

#[test]
fn witness_cover_round_trip() {
    const BLOCK: &str = "8,64,1024,32768,2097152,268435456,68719476736,35184372088832";
    let (code, out) = schreier(&["witness", "cover", "--prefix", "2,3,...", "--set", BLOCK]);
    assert_eq!(code, 0, "{out}");
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["h"], serde_json::json!([2]));
    // The cover prefix reproduces the block through the block command.
    let n = doc["n"].as_str().unwrap();
    let (code, out) = schreier(&["block", "measure", "--block", "RA(1)", "--prefix", n, "--n", "2"]);
    assert_eq!(code, 0, "{out}");
    let m: serde_json::Value = serde_json::from_str(&out).unwrap();
    let support: Vec<String> = m["support"].as_array().unwrap().iter().map(|x| x.to_string()).collect();
    assert_eq!(support.join(","), BLOCK);
}
