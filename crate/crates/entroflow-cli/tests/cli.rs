//! End-to-end checks of the command line interface: exit codes, report
//! files and determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entroflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn trace_logsob_verify_passes() {
    let out = run(&[
        "verify",
        "--ineq",
        "trace-logsob",
        "--h",
        "0.5",
        "--dim",
        "1",
        "--grid",
        "4096",
        "--samples",
        "10",
        "--seed",
        "7",
    ]);
    assert_eq!(exit_code(&out), 0, "{:?}", out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("verdict: pass"));
}

#[test]
fn gns_verify_passes() {
    let out = run(&[
        "verify", "--ineq", "gns", "--alpha", "2", "--dim", "1", "--samples", "5",
    ]);
    assert_eq!(exit_code(&out), 0, "{:?}", out);
}

#[test]
fn gns_rejects_alpha_below_one() {
    let out = run(&["verify", "--ineq", "gns", "--alpha", "0.5", "--dim", "1"]);
    assert_eq!(exit_code(&out), 2, "{:?}", out);
}

#[test]
fn cd_identity_check_passes() {
    let out = run(&[
        "identity-check",
        "--which",
        "cd",
        "--dim",
        "2",
        "--grid",
        "128",
        "--samples",
        "20",
    ]);
    assert_eq!(exit_code(&out), 0, "{:?}", out);
}

#[test]
fn unknown_identity_tag_is_a_config_error() {
    let out = run(&["identity-check", "--which", "no-such-identity"]);
    assert_eq!(exit_code(&out), 2, "{:?}", out);
}

#[test]
fn unknown_inequality_tag_is_a_config_error() {
    let out = run(&["verify", "--ineq", "no-such-inequality"]);
    assert_eq!(exit_code(&out), 2, "{:?}", out);
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = run(&["verify"]);
    assert_eq!(exit_code(&out), 2, "{:?}", out);
}

#[test]
fn reports_are_deterministic_modulo_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let mut jsons = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        let out = run(&[
            "verify",
            "--ineq",
            "trace-logsob",
            "--h",
            "-0.25",
            "--grid",
            "1024",
            "--samples",
            "5",
            "--seed",
            "11",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0, "{:?}", out);
        let mut value: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        value.as_object_mut().unwrap().remove("timestamp");
        jsons.push(serde_json::to_string(&value).unwrap());
    }
    assert_eq!(jsons[0], jsons[1]);
}

#[test]
fn flow_writes_a_csv_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let out = run(&[
        "flow",
        "--grid",
        "128",
        "--t-end",
        "0.5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{:?}", out);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("t,mass,entropy,production\n"));
    assert!(csv.lines().count() > 10);
}
