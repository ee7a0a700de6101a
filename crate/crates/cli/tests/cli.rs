//! Behavior of the `veto` binary: exit codes, JSON shapes, determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn ballot(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../ballots")
        .join(name)
}

fn veto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_veto"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn winners_of(value: &Value) -> Vec<String> {
    value["winners"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect()
}

#[test]
fn winners_on_golden_files() {
    let out = veto(&["winners", ballot("tie.ballots").to_str().unwrap()]);
    let doc = stdout_json(&out);
    assert_eq!(winners_of(&doc), ["a", "b"]);
    assert_eq!(doc["rule"], "simultaneous-veto");
    assert!(doc["trace"].is_array());
    assert_eq!(doc["trace"][0]["time"], "0/1");

    let out = veto(&[
        "winners",
        ballot("resolvability.ballots").to_str().unwrap(),
        "--no-trace",
    ]);
    let doc = stdout_json(&out);
    assert_eq!(winners_of(&doc), ["a", "b", "c"]);
    assert!(doc.get("trace").is_none());
}

#[test]
fn identical_invocations_are_byte_identical() {
    let file = ballot("consistency.ballots");
    let args = ["winners", file.to_str().unwrap()];
    let first = veto(&args);
    let second = veto(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn serial_requires_matching_order_length() {
    let file = ballot("tie.ballots");
    let ok = veto(&["serial", file.to_str().unwrap(), "--order", "2,1"]);
    assert_eq!(winners_of(&stdout_json(&ok)), ["a", "b"]);

    let short = veto(&["serial", file.to_str().unwrap(), "--order", "1"]);
    assert_eq!(short.status.code(), Some(2));

    let out_of_range = veto(&["serial", file.to_str().unwrap(), "--order", "1,9"]);
    assert_eq!(out_of_range.status.code(), Some(2));
}

#[test]
fn core_reports_blocking_certificates() {
    let out = veto(&["core", ballot("convexity.ballots").to_str().unwrap()]);
    let doc = stdout_json(&out);
    let core: Vec<&str> = doc["core"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(core.contains(&"b1"));
    assert!(core.contains(&"b3"));
    assert!(!core.contains(&"b2"));
    let blocking = &doc["certificates"]["b2"]["blocking"];
    assert_eq!(blocking["coalition"], serde_json::json!([1, 2]));
    assert_eq!(blocking["witness"], serde_json::json!(["a1", "a2"]));
    assert_eq!(blocking["margin"], "1/1");
}

#[test]
fn distortion_serializes_values_and_infinity() {
    let out = veto(&["distortion", ballot("tie.ballots").to_str().unwrap()]);
    let doc = stdout_json(&out);
    assert_eq!(doc["a"], "3/1");
    assert_eq!(doc["b"], "3/1");

    // A candidate ranked last by the single voter has unbounded
    // distortion.
    let dir = std::env::temp_dir().join("veto-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let single = dir.join("single.ballots");
    std::fs::write(&single, "candidates a b\n1: a > b\n").unwrap();
    let out = veto(&["distortion", single.to_str().unwrap()]);
    let doc = stdout_json(&out);
    assert_eq!(doc["a"], "1/1");
    assert_eq!(doc["b"], "infinity");

    let filtered = veto(&[
        "distortion",
        single.to_str().unwrap(),
        "--candidate",
        "b",
    ]);
    let doc = stdout_json(&filtered);
    assert!(doc.get("a").is_none());
    assert_eq!(doc["b"], "infinity");
}

#[test]
fn lp_size_env_var_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_veto"))
        .args(["distortion", ballot("consistency.ballots").to_str().unwrap()])
        .env("VETO_MAX_LP_SIZE", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("limit"));
}

#[test]
fn malformed_inputs_exit_two_with_line_numbers() {
    let missing = veto(&["winners", "no-such-file.ballots"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = std::env::temp_dir().join("veto-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.ballots");
    std::fs::write(&bad, "candidates a b\n1: a > a\n").unwrap();
    let out = veto(&["winners", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let unknown_flag = veto(&["winners", "--bogus"]);
    assert_eq!(unknown_flag.status.code(), Some(2));
}

#[test]
fn axioms_emit_json_lines_and_succeed() {
    let out = veto(&[
        "axioms", "--n", "3", "--m", "3", "--trials", "25", "--seed", "11",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut axioms_seen = Vec::new();
    for line in text.lines() {
        let doc: Value = serde_json::from_str(line).expect("each line is JSON");
        assert_eq!(doc["verdict"], "PASS");
        axioms_seen.push(doc["axiom"].as_str().unwrap().to_string());
    }
    // Five sweeps plus three violation reproductions.
    assert_eq!(axioms_seen.len(), 8);
    assert!(axioms_seen.contains(&"resolvability".to_string()));
    assert!(axioms_seen.contains(&"condorcet-violation".to_string()));
}

#[test]
fn axioms_filter_by_name() {
    let out = veto(&[
        "axioms", "--n", "2", "--m", "2", "--trials", "5", "--seed", "3",
        "--axiom", "monotonicity",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);

    let unknown = veto(&[
        "axioms", "--n", "2", "--m", "2", "--trials", "5", "--seed", "3",
        "--axiom", "nonsense",
    ]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn order_for_matching_round_trips_through_json() {
    let file = ballot("resolvability.ballots");
    let out = veto(&["winners", file.to_str().unwrap(), "--no-trace"]);
    let doc = stdout_json(&out);
    let dir = std::env::temp_dir().join("veto-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let witness_path = dir.join("witness.json");
    std::fs::write(&witness_path, doc["witness"].to_string()).unwrap();

    let out = veto(&[
        "order-for-matching",
        file.to_str().unwrap(),
        "--matching",
        witness_path.to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    let order = doc["order"].as_array().unwrap();
    assert_eq!(order.len(), 2);
    // The serial winners contain the matching's tied winners (all three).
    assert_eq!(winners_of(&doc), ["a", "b", "c"]);
}

#[test]
fn simulate_is_deterministic_and_shaped() {
    let args = [
        "simulate", "core-size", "--m", "3", "--n", "30", "--trials", "10",
        "--seed", "9",
    ];
    let first = veto(&args);
    let second = veto(&args);
    assert_eq!(first.stdout, second.stdout);
    let doc = stdout_json(&first);
    assert_eq!(doc["trials"], 10);
    let histogram: usize = doc["histogram"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_u64().unwrap() as usize)
        .sum();
    assert_eq!(histogram, 10);
    assert!(doc["mean"].as_str().unwrap().contains('/'));
}

#[test]
fn explicit_weight_files() {
    let dir = std::env::temp_dir().join("veto-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let q_path = dir.join("q.json");
    std::fs::write(&q_path, r#"{"a": "1/1", "b": "1/1"}"#).unwrap();
    let file = ballot("tie.ballots");
    let out = veto(&[
        "winners",
        file.to_str().unwrap(),
        "--q",
        &format!("explicit:{}", q_path.display()),
        "--no-trace",
    ]);
    assert_eq!(winners_of(&stdout_json(&out)), ["a", "b"]);

    // Mismatched totals are an input error.
    let p_path = dir.join("p.json");
    std::fs::write(&p_path, r#"{"1": "1/1", "2": "2/1"}"#).unwrap();
    let out = veto(&[
        "winners",
        file.to_str().unwrap(),
        "--p",
        &format!("explicit:{}", p_path.display()),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown candidate names are rejected.
    let bad_q = dir.join("bad_q.json");
    std::fs::write(&bad_q, r#"{"zz": "1/1"}"#).unwrap();
    let out = veto(&[
        "winners",
        file.to_str().unwrap(),
        "--q",
        &format!("explicit:{}", bad_q.display()),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
