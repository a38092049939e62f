//! CLI contract tests: exit codes, report schema, re-parse of emitted
//! expression strings, and output-file behavior.

use helmholtz_core::parser::{parse_expression, ParseContext};
use std::path::PathBuf;
use std::process::Command;

fn input(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "inputs", name]
        .iter()
        .collect();
    path.display().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_helmholtz"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write_temp(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join("helmholtz-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.display().to_string()
}

#[test]
fn passing_check_exits_zero_with_golden_lines() {
    let (code, stdout, _) = run(&["check", &input("shm.json")]);
    assert_eq!(code, 0);
    assert!(stdout.contains("H3 (1,1): PASS (residual 0)"), "{stdout}");
    assert!(stdout.contains("H1: vacuous (n = 1)"), "{stdout}");
    assert!(stdout.contains("overall: PASS"), "{stdout}");
    assert!(stdout.ends_with('\n'));
    assert!(!stdout.contains('\r'));
}

#[test]
fn failing_check_exits_two_but_still_reports() {
    let (code, stdout, _) = run(&["check", &input("dho.json")]);
    assert_eq!(code, 2);
    assert!(stdout.contains("residual 2*b"), "{stdout}");
    assert!(stdout.contains("overall: FAIL"), "{stdout}");
}

#[test]
fn construct_on_failing_system_reports_and_exits_two() {
    let (code, stdout, _) = run(&["construct", &input("dho.json"), "--format", "json"]);
    assert_eq!(code, 2);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["constructed"], false);
    assert_eq!(doc["check"]["overall"], "fail");
}

#[test]
fn schema_violations_exit_one() {
    let path = write_temp(
        "extra_field.json",
        r#"{"n":1,"coordinates":["x1"],"equations":["x1''"],"comment":"nope"}"#,
    );
    let (code, stdout, stderr) = run(&["check", &path]);
    assert_eq!(code, 1);
    assert!(stdout.is_empty());
    assert!(stderr.contains("error"), "{stderr}");

    let path = write_temp(
        "count_mismatch.json",
        r#"{"n":2,"coordinates":["x1","x2"],"equations":["x1''"]}"#,
    );
    assert_eq!(run(&["check", &path]).0, 1);

    let (code, _, stderr) = run(&["check", "/definitely/not/here.json"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("cannot read"));
}

#[test]
fn usage_violations_exit_one() {
    assert_eq!(run(&["check", &input("shm.json"), "--samples", "0"]).0, 1);
    assert_eq!(run(&["check", &input("shm.json"), "--tol", "0"]).0, 1);
    assert_eq!(run(&["check", &input("shm.json"), "--tol", "-1e-9"]).0, 1);
    assert_eq!(run(&["frobnicate", &input("shm.json")]).0, 1);
    assert_eq!(run(&["check"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn commands_require_the_matching_document_kind() {
    let (code, _, stderr) = run(&["roundtrip", &input("shm.json")]);
    assert_eq!(code, 1);
    assert!(stderr.contains("lagrangian"), "{stderr}");

    let (code, _, stderr) = run(&["check", &input("shm_lagrangian.json")]);
    assert_eq!(code, 1);
    assert!(stderr.contains("equations"), "{stderr}");

    let (code, _, stderr) = run(&["multiplier", &input("gyro.json")]);
    assert_eq!(code, 1);
    assert!(stderr.contains("one-dimensional"), "{stderr}");
}

#[test]
fn numeric_caveat_still_exits_zero_and_is_flagged() {
    let path = write_temp(
        "caveat.json",
        r#"{"n":1,"coordinates":["x1"],"parameters":["c"],
            "equations":["x1'' + c*(sin(t)^2 + cos(t)^2 - 1)*x1'"]}"#,
    );
    let (code, stdout, _) = run(&["check", &path]);
    assert_eq!(code, 0);
    assert!(stdout.contains("numerically zero"), "{stdout}");
    assert!(stdout.contains("overall: PASS (numeric caveat)"), "{stdout}");

    let (code, stdout, _) = run(&["check", &path, "--format", "json"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["overall"], "pass-with-caveat");
    assert_eq!(doc["conditions"][2]["entries"][0]["verdict"], "numerically_zero");
}

#[test]
fn roundtrip_rejects_acceleration_dependent_lagrangian() {
    let path = write_temp(
        "accel_lagrangian.json",
        r#"{"n":1,"coordinates":["x1"],"lagrangian":"x1''*x1"}"#,
    );
    let (code, _, stderr) = run(&["roundtrip", &path]);
    assert_eq!(code, 1);
    assert!(stderr.contains("acceleration"), "{stderr}");
}

#[test]
fn roundtrip_closes_the_loop() {
    let (code, stdout, _) = run(&["roundtrip", &input("shm_lagrangian.json"), "--format", "json"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["overall"], "pass");
    assert_eq!(doc["equations"][0], "x1'' + w^2*x1");
}

#[test]
fn emitted_expressions_reparse_against_the_system_context() {
    let ctx = ParseContext::new(vec!["x1".into()], vec!["b".into(), "w".into()]).unwrap();

    let (_, stdout, _) = run(&["check", &input("dho.json"), "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let residual = doc["conditions"][2]["entries"][0]["residual"].as_str().unwrap();
    let parsed = parse_expression(residual, &ctx).unwrap();
    let reference = parse_expression("2*b", &ctx).unwrap();
    assert!((parsed - reference).normalize().is_const_zero());

    let (_, stdout, _) = run(&["multiplier", &input("dho.json"), "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    for field in [
        doc["lambda"].as_str().unwrap(),
        doc["modified"][0].as_str().unwrap(),
        doc["construction"]["lagrangian"].as_str().unwrap(),
        doc["construction"]["parts"]["velocity_part"].as_str().unwrap(),
        doc["construction"]["parts"]["scalar_part"].as_str().unwrap(),
    ] {
        let reparsed = parse_expression(field, &ctx)
            .unwrap_or_else(|e| panic!("`{field}` failed to reparse: {e}"));
        let printed = reparsed.pretty(ctx.coordinates());
        let again = parse_expression(&printed, &ctx).unwrap();
        assert!((reparsed - again).normalize().is_const_zero());
    }
}

#[test]
fn json_reports_carry_schema_and_settings() {
    let (_, stdout, _) = run(&[
        "check",
        &input("shm.json"),
        "--format",
        "json",
        "--seed",
        "7",
        "--samples",
        "50",
        "--tol",
        "1e-8",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["settings"]["seed"], 7);
    assert_eq!(doc["settings"]["samples"], 50);
    assert_eq!(doc["settings"]["tol"], 1e-8);
    assert_eq!(doc["n"], 1);
}

#[test]
fn output_flag_writes_the_same_bytes() {
    let out_path = write_temp("report.json", "");
    let (code, stdout, _) = run(&["check", &input("gyro.json"), "--format", "json"]);
    assert_eq!(code, 0);
    let (code_file, stdout_file, _) = run(&[
        "check",
        &input("gyro.json"),
        "--format",
        "json",
        "--output",
        &out_path,
    ]);
    assert_eq!(code_file, 0);
    assert!(stdout_file.is_empty());
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(written, stdout);
}
