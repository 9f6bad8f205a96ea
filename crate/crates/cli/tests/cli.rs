use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_ivmonoid"))
        .args(args)
        .output()
        .expect("binary runs");
    let report = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    (out.status.code().expect("exit code"), report)
}

fn problem(dir: &Path, text: &str) -> String {
    let path = dir.join("problem.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const QUADRATIC: &str = r#"{"polynomial": ["0", "-1", "1"], "scope": 2}"#;

#[test]
fn dense_set_points() {
    let dir = tempfile::tempdir().unwrap();
    let file = problem(dir.path(), QUADRATIC);
    let (code, report) = run(&["dense-set", &file]);
    assert_eq!(code, 0);
    assert_eq!(report["status"], "ok");
    assert_eq!(report["tool"], "ivmonoid");
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["spec_hash"].as_str().unwrap().len(), 64);
    assert_eq!(report["result"]["points"], serde_json::json!(["-1", "2"]));
}

#[test]
fn member_refusal_and_acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let file = problem(dir.path(), QUADRATIC);
    let (code, report) = run(&["member", &file, "--g", r#"["0","-1/4","1/4"]"#]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["verdict"], "refused");
    assert_eq!(report["result"]["reason"], "not integer-valued");

    let (code, report) = run(&["member", &file, "--g", r#"["0","-1/2","1/2"]"#]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["verdict"], "member");
    assert_eq!(report["result"]["m"], 1);
}

#[test]
fn verify_holds_on_all_samples() {
    let dir = tempfile::tempdir().unwrap();
    let file = problem(dir.path(), QUADRATIC);
    let (code, report) = run(&["verify", &file, "--samples", "200", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(report["status"], "ok");
    assert_eq!(report["result"]["summary"], "200/200 equivalences hold");
    assert_eq!(report["result"]["homomorphism"]["additivity_failures"], 0);
}

#[test]
fn global_commands() {
    let (code, report) = run(&["critical-primes", "--poly", r#"["0","2","-3","1"]"#]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["primes"], serde_json::json!([2, 3]));
    let (_, report) = run(&["fixed-divisor", "--poly", r#"["0","2","-3","1"]"#]);
    assert_eq!(report["result"]["fixed_divisor"], "6");
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let file = problem(dir.path(), QUADRATIC);
    let once = || {
        Command::new(env!("CARGO_BIN_EXE_ivmonoid"))
            .args(["verify", &file, "--samples", "60"])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(once(), once());
}

#[test]
fn flags_change_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let file = problem(dir.path(), QUADRATIC);
    let (_, a) = run(&["factor", &file]);
    let (_, b) = run(&["factor", &file, "--scope", "3"]);
    assert_ne!(a["spec_hash"], b["spec_hash"]);
}

#[test]
fn input_errors_exit_2() {
    let (code, report) = run(&["factor", "--poly", r#"["0"]"#]);
    assert_eq!(code, 2);
    assert_eq!(report["status"], "error");
    assert_eq!(report["error"]["kind"], "input");

    let dir = tempfile::tempdir().unwrap();
    let file = problem(dir.path(), r#"{"polynomial": ["1"], "scope": 4}"#);
    let (code, _) = run(&["factor", &file]);
    assert_eq!(code, 2);
}

#[test]
fn resource_errors_exit_3() {
    // Denominator is the square of a 61-bit prime.
    let poly = r#"["0","1/5316911983139663487003542222693990401"]"#;
    let (code, report) = run(&["critical-primes", "--poly", poly]);
    assert_eq!(code, 3);
    assert_eq!(report["error"]["kind"], "resource");
}

#[test]
fn suite_subset_runs() {
    let (code, report) = run(&["verify", "--suite", "2"]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(report["status"], "ok");
}
