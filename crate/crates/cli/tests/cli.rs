//! End-to-end smoke tests for the installed binary: argument handling,
//! exit codes, and the shape of each subcommand's output.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asm-galois"))
        .args(args)
        .output()
        .expect("binary must run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn classify_summarizes_the_census() {
    let out = run(&["classify", "--q", "3", "--c", "2"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("2 + 9 + 2 = 13 lines, all Galois"), "got: {}", text);
    assert!(text.contains("counts match the expected split (q-1, q^2, 2)"));
}

#[test]
fn check_line_reports_a_verdict() {
    // the plane at infinity cut with {X = 0}: the line of poles of x
    let out = run(&["check-line", "--q", "3", "--h1", "0,0,1,0", "--h2", "1,0,0,0"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("galois: yes"), "got: {}", text);
    assert!(text.contains("degree: 3"));
    assert!(text.contains("group: additive"));
    assert!(text.contains("classification: type-b"));
}

#[test]
fn check_line_accepts_extension_coefficients() {
    let out = run(&[
        "check-line", "--q", "3", "--level", "2", "--h1", "1,0,3,0", "--h2", "0,1,0,3",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("galois:"), "got: {}", text);
    assert!(text.contains("classification:"));
}

#[test]
fn fiber_lists_points_with_indices() {
    // fiber of the projection away from {Y = Z = 0} over the member {Y = 0}
    let out = run(&[
        "fiber", "--q", "3", "--line", "0,1,0,0;0,0,1,0", "--base", "0,1", "--ext", "1",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("degree: 3"), "got: {}", text);
    assert!(text.contains("complete: true"));
    assert!(text.contains("ramification index"));
}

#[test]
fn aut_prints_group_order_and_generators() {
    let out = run(&["aut", "--q", "4"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("order 96"), "got: {}", text);
    assert!(text.contains("spanning the whole group: true"));
}

#[test]
fn report_json_has_the_schema_marker() {
    let out = run(&[
        "report", "--q", "3", "--seed", "5", "--negatives", "8", "--format", "json",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("\"schema\": 1"), "got: {}", text);
    assert!(text.contains("\"census\""));
    assert!(!text.contains("\"timing\""), "timing must stay out of JSON");
}

#[test]
fn report_csv_has_fixed_columns() {
    let out = run(&[
        "report", "--q", "3", "--seed", "5", "--negatives", "8", "--format", "csv",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.starts_with("line_h1,line_h2,degree,stab_order,group_type,is_galois,classification\n"),
        "got: {}",
        text
    );
}

#[test]
fn usage_errors_exit_with_code_2() {
    for args in [
        vec!["classify", "--q", "2"],
        vec!["classify", "--q", "6"],
        vec!["classify", "--q", "3", "--c", "0"],
        vec!["classify", "--q", "3", "--c", "3"],
        vec!["check-line", "--q", "3", "--h1", "0,0,9,0", "--h2", "1,0,0,0"],
        vec!["no-such-command"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "args {:?}: {}", args, stderr(&out));
        assert!(!stderr(&out).is_empty());
    }
}

#[test]
fn help_and_version_exit_cleanly() {
    for args in [vec!["--help"], vec!["--version"], vec!["classify", "--help"]] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "args {:?}", args);
    }
}
