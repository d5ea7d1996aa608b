// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oqs-ident")).current_dir(dir).args(args).output().expect("binary runs")
}

fn run_env(dir: &Path, args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oqs-ident"))
        .current_dir(dir)
        .env(key, val)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const QUBIT_PARAMS: &str = r#"{
  "schema": "oqs-ident/params/v1",
  "theta": [0.3, -0.2, 1.1],
  "gamma": [[0.2,0],[0,-0.05],[0,0], [0,0.05],[0.1,0],[0,0], [0,0],[0,0],[0.05,0]],
  "symmetric": false
}"#;

fn qubit_system(dir: &Path) {
    ok(&run(dir, &["basis", "--qubits", "1", "--out", "basis.json"]));
    fs::write(dir.join("params.json"), QUBIT_PARAMS).unwrap();
    ok(&run(dir, &["build", "--basis", "basis.json", "--params", "params.json", "--out", "system.json"]));
    ok(&run(dir, &["schedule", "--period", "1", "--frames", "6", "--out", "sched.json"]));
}

#[test]
fn basis_for_one_qubit_lists_three_generators() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(dir.path(), &["basis", "--qubits", "1", "--out", "basis.json"]));
    let b = json(&dir.path().join("basis.json"));
    assert_eq!(b["schema"], "oqs-ident/basis/v1");
    assert_eq!(b["generators"].as_array().unwrap().len(), 3);
    assert_eq!(b["words"], serde_json::json!(["x", "y", "z"]));
    // f_xyz = sqrt(2), 1-based
    let f = b["f"].as_array().unwrap();
    let e = f.iter().find(|e| e[0] == 1 && e[1] == 2).unwrap();
    assert_eq!(e[2], 3);
    assert!((e[3].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn malformed_params_exit_one_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&run(d, &["basis", "--qubits", "1", "--out", "basis.json"]));
    fs::write(d.join("params.json"), r#"{"schema": "oqs-ident/params/v1", "theta": [1, 2"#).unwrap();
    let out = run(d, &["build", "--basis", "basis.json", "--params", "params.json", "--out", "system.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("params.json") && err.contains("line"), "{err}");

    fs::write(d.join("params.json"), r#"{"theta": [1, 2, 3], "gamma": [], "symmetric": true}"#).unwrap();
    let out = run(d, &["build", "--basis", "basis.json", "--params", "params.json", "--out", "system.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing \"schema\""));

    fs::write(
        d.join("params.json"),
        r#"{"schema": "oqs-ident/params/v1", "theta": [1, 2, 3], "gamma": [[1, 0]], "symmetric": true}"#,
    )
    .unwrap();
    let out = run(d, &["build", "--basis", "basis.json", "--params", "params.json", "--out", "system.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
    assert!(!d.join("system.json").exists());
}

#[test]
fn same_input_and_output_path_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    qubit_system(d);
    let out = run(d, &["simulate", "--system", "system.json", "--schedule", "sched.json", "--out", "system.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    qubit_system(d);
    let out = run(d, &["check", "--system", "system.json", "--schedule", "sched.json", "--report", "report.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&d.join("report.json"))["status"], "identifiable");

    ok(&run(d, &["schedule", "--kind", "uniform", "--period", "1", "--frames", "6", "--out", "uniform.json"]));
    let out = run(d, &["check", "--system", "system.json", "--schedule", "uniform.json", "--report", "report.json"]);
    assert_eq!(out.status.code(), Some(2));
    let rep = json(&d.join("report.json"));
    assert!(rep["clauses"].as_array().unwrap().iter().any(|c| c == "sampling ratios rational"));

    ok(&run(
        d,
        &["pulses", "--alpha", "0", "--widths", "0.2,0.4", "--channel", "3", "--period", "1", "--out", "pulses.json"],
    ));
    let out = run(
        d,
        &[
            "check",
            "--mode",
            "controlled",
            "--system",
            "system.json",
            "--schedule",
            "sched.json",
            "--pulses",
            "pulses.json",
            "--report",
            "report.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipeline_recovers_qubit_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    qubit_system(d);
    ok(&run(
        d,
        &["simulate", "--system", "system.json", "--schedule", "sched.json", "--runs", "3", "--out", "record.json"],
    ));
    ok(&run(
        d,
        &[
            "fit-discrete",
            "--record",
            "record.json",
            "--schedule",
            "sched.json",
            "--order",
            "3",
            "--affine",
            "--out",
            "model.json",
        ],
    ));
    ok(&run(d, &["reconstruct-lds", "--model", "model.json", "--schedule", "sched.json", "--out", "contsys.json"]));
    ok(&run(
        d,
        &[
            "reconstruct-params",
            "--A",
            "contsys.json",
            "--beta",
            "contsys.json",
            "--basis",
            "basis.json",
            "--out",
            "hat.json",
        ],
    ));
    let hat = json(&d.join("hat.json"));
    assert_eq!(hat["schema"], "oqs-ident/params-hat/v1");
    assert_eq!(hat["status"], "full");
    let params: Value = serde_json::from_str(QUBIT_PARAMS).unwrap();
    for (a, b) in hat["theta"].as_array().unwrap().iter().zip(params["theta"].as_array().unwrap()) {
        assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 1e-8);
    }
    for (a, b) in hat["gamma"].as_array().unwrap().iter().zip(params["gamma"].as_array().unwrap()) {
        for k in 0..2 {
            assert!((a[k].as_f64().unwrap() - b[k].as_f64().unwrap()).abs() < 1e-8);
        }
    }
}

#[test]
fn general_recovery_needs_beta() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&run(d, &["basis", "--qubits", "1", "--out", "basis.json"]));
    fs::write(d.join("params.json"), QUBIT_PARAMS).unwrap();
    ok(&run(
        d,
        &[
            "build",
            "--basis",
            "basis.json",
            "--params",
            "params.json",
            "--out",
            "system.json",
            "--a-out",
            "A.json",
            "--beta-out",
            "beta.json",
        ],
    ));
    let out = run(d, &["reconstruct-params", "--A", "A.json", "--basis", "basis.json", "--out", "hat.json"]);
    assert_eq!(out.status.code(), Some(1));
    ok(&run(
        d,
        &["reconstruct-params", "--A", "A.json", "--beta", "beta.json", "--basis", "basis.json", "--out", "hat.json"],
    ));
    assert_eq!(json(&d.join("hat.json"))["status"], "full");
    let out = run(
        d,
        &[
            "reconstruct-params",
            "--A",
            "beta.json",
            "--beta",
            "beta.json",
            "--basis",
            "basis.json",
            "--out",
            "hat.json",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn noisy_simulation_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    qubit_system(d);
    let args = |out: &'static str| {
        vec![
            "simulate",
            "--system",
            "system.json",
            "--schedule",
            "sched.json",
            "--runs",
            "5",
            "--noise-sigma",
            "0.01",
            "--seed",
            "42",
            "--out",
            out,
        ]
    };
    ok(&run_env(d, &args("a.json"), "OQS_IDENT_THREADS", "1"));
    ok(&run_env(d, &args("b.json"), "OQS_IDENT_THREADS", "4"));
    ok(&run(d, &args("c.json")));
    let a = fs::read(d.join("a.json")).unwrap();
    assert_eq!(a, fs::read(d.join("b.json")).unwrap());
    assert_eq!(a, fs::read(d.join("c.json")).unwrap());
    let rec = json(&d.join("a.json"));
    assert_eq!(rec["noise_sigma"], 0.01);
    assert_eq!(rec["samples"].as_array().unwrap().len(), 5 * (6 * 3 + 1));
}

#[test]
fn noiseless_outputs_are_identical_between_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    qubit_system(d);
    for out in ["r1.json", "r2.json"] {
        ok(&run(d, &["simulate", "--system", "system.json", "--schedule", "sched.json", "--runs", "2", "--out", out]));
    }
    assert_eq!(fs::read(d.join("r1.json")).unwrap(), fs::read(d.join("r2.json")).unwrap());
    for out in ["m1.json", "m2.json"] {
        ok(&run(
            d,
            &[
                "fit-discrete",
                "--record",
                "r1.json",
                "--schedule",
                "sched.json",
                "--order",
                "3",
                "--affine",
                "--out",
                out,
            ],
        ));
    }
    assert_eq!(fs::read(d.join("m1.json")).unwrap(), fs::read(d.join("m2.json")).unwrap());
}

#[test]
fn two_qubit_demo_recovers_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&run(d, &["demo", "two-qubit", "--out-dir", "artifacts", "--report", "summary.json"]));
    let s = json(&d.join("summary.json"));
    assert_eq!(s["identifiability"], "identifiable");
    assert_eq!(s["recovery_status"], "full");
    let max = s["max_parameter_error"].as_f64().unwrap();
    assert!(max <= 1e-6, "max parameter error {max}");
    for (name, row) in s["parameters"].as_object().unwrap() {
        assert!(row["abs_error"].as_f64().unwrap() <= 1e-6, "{name}");
    }
    // the written artifacts feed the individual subcommands
    let a = d.join("artifacts");
    ok(&run(
        &a,
        &[
            "reconstruct-params",
            "--A",
            "contsys.json",
            "--beta",
            "contsys.json",
            "--basis",
            "basis.json",
            "--symmetric",
            "--out",
            "again.json",
        ],
    ));
    assert_eq!(json(&a.join("again.json"))["status"], "full");
    let out = run(&a, &["check", "--system", "system.json", "--schedule", "schedule.json", "--report", "check.json"]);
    assert_eq!(out.status.code(), Some(0));
}
