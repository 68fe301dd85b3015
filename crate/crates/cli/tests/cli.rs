//! End-to-end tests of the `freestate` binary: command output, exit codes,
//! configuration handling, and report determinism.

use std::path::Path;
use std::process::{Command, Output};

fn freestate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freestate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process exits normally")
}

#[test]
fn invert_s_matches_the_closed_form() {
    let out = freestate(&["invert-s", "1", "2", "3"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("1.00000000000000e0"), "{text}");
    assert!(text.contains("2.25733395755292e0"), "{text}");
    assert!(text.contains("7.77200187265877e0"), "{text}");
    assert!(text.contains("residual"), "{text}");
}

#[test]
fn invert_s_rejects_targets_outside_the_range() {
    let out = freestate(&["invert-s", "0.4", "0.4"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("outside the range"), "{}", stderr(&out));

    let out = freestate(&["invert-s", "1"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn spectrum_prints_annulus_radii() {
    let out = freestate(&["spectrum", "2", "1"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("1.73205080756888e0"), "{text}");
    assert!(text.contains("2.23606797749979e0"), "{text}");

    let out = freestate(&["spectrum", "--universal", "2", "1"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("inner radius = 1.00000000000000e0"), "{text}");
    assert!(text.contains("outer radius = 3.00000000000000e0"), "{text}");
}

#[test]
fn state_evaluates_known_values() {
    let out = freestate(&["state", "", "1", "-2 1"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("phi(e) = 1.00000000000000e0"), "{text}");
    assert!(text.contains("phi(\"1\") = 5.00000000000000e-1"), "{text}");
    assert!(text.contains("phi(\"-2 1\") = -5.00000000000000e-1"), "{text}");

    let out = freestate(&["state", "--outer", "--c", "1", "--c", "2", "1 1"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("lambda = ||c||"), "{text}");
    assert!(text.contains("phi(\"1 1\") = 2.00000000000000e-1"), "{text}");
}

#[test]
fn gram_and_boundary_commands_run() {
    let out = freestate(&["gram", "--k", "2"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("positive semidefinite"), "{text}");
    assert!(text.contains("B - a a^T"), "{text}");

    let out = freestate(&["boundary", "1 -2"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("beta(u1) = 1.66666666666667e-1"), "{text}");
    assert!(text.contains("integral P"), "{text}");
}

#[test]
fn verify_passes_on_the_default_configuration() {
    let out = freestate(&["verify", "--max-len", "3"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("overall: PASS (35/35 checks)"), "{text}");
    assert!(!text.contains("[FAIL]"), "{text}");
}

#[test]
fn report_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    for path in [&first, &second] {
        let out = freestate(&[
            "verify",
            "--max-len",
            "2",
            "--seed",
            "11",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    }
    let a = std::fs::read(&first).unwrap();
    let b = std::fs::read(&second).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "reports differ between identical runs");
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("\"overall_pass\": true"), "{text}");
    assert!(text.contains("\"name\": \"freestate\""), "{text}");
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("job.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "c = [2.0, 1.0]\nlambda = 2.0\nmax_word_len = 5\nseed = 5\n",
    );

    let out = freestate(&["state", "--config", &path, "1"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("phi(\"1\") = 8.75000000000000e-1"), "{}", stdout(&out));

    let report = dir.path().join("report.json");
    let out = freestate(&[
        "verify",
        "--config",
        &path,
        "--max-len",
        "2",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"max_word_len\": 2"), "flag must override the file: {text}");
    assert!(text.contains("\"seed\": 5"), "{text}");
    assert!(text.contains("\"lambda\": 2.0"), "{text}");
}

#[test]
fn bad_configurations_are_rejected() {
    let dir = tempfile::tempdir().unwrap();

    let path = write_config(dir.path(), "c = [1.0, 1.0]\nlambda = 1.0\nbogus = 3\n");
    let out = freestate(&["verify", "--config", &path]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("cannot parse"), "{}", stderr(&out));

    let out = freestate(&["verify", "--config", "/nonexistent/job.toml"]);
    assert_eq!(exit_code(&out), 2);

    let out = freestate(&["verify", "--c", "1", "--c", "1"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("lambda is required"), "{}", stderr(&out));

    let out = freestate(&["verify", "--max-len", "9"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("cap"), "{}", stderr(&out));
}

#[test]
fn eigenvalues_on_the_annulus_boundary_are_rejected() {
    let out = freestate(&["verify", "--c", "1", "--c", "1", "--lambda", "1.4142135623730951"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("open interval"), "{}", stderr(&out));
}

#[test]
fn failing_checks_exit_with_code_one() {
    let out = freestate(&["verify", "--max-len", "2", "--tol.smap.round_trip", "0"]);
    assert_eq!(exit_code(&out), 1, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("[FAIL] smap.round_trip"), "{text}");
    assert!(text.contains("overall: FAIL"), "{text}");
    assert!(stderr(&out).contains("failing checks: smap.round_trip"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_with_code_two() {
    let out = freestate(&[]);
    assert_eq!(exit_code(&out), 2);

    let out = freestate(&["frobnicate"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("unknown command"), "{}", stderr(&out));

    let out = freestate(&["verify", "--bogus"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("unknown flag"), "{}", stderr(&out));

    let out = freestate(&["--help"]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("usage:"), "{}", stdout(&out));
}
