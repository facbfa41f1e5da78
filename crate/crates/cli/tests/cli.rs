//! End-to-end tests of the `wildquot` binary: subcommands, output formats,
//! exit codes, configuration precedence, and report determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wildquot"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_with_env(args: &[&str], key: &str, value: &str) -> Output {
    bin().args(args).env(key, value).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("exit code present")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("wildquot_cli_it_{}_{name}", std::process::id()))
}

#[test]
fn structured_verify_is_byte_identical_and_carries_the_ledger() {
    let args = ["verify", "b0", "--num-specializations", "1"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(code_of(&first), 0, "stderr: {}", stderr_of(&first));
    assert_eq!(first.stdout, second.stdout, "repeat runs must agree byte for byte");
    let text = stdout_of(&first);
    assert!(text.contains("\"schema_version\": 1"));
    assert!(text.contains("\"final_ledger\""));
    assert!(text.contains("\"E4\": -3"));
    let parsed: serde_json::Value = serde_json::from_str(&text).expect("valid JSON report");
    assert_eq!(parsed["cases"][0]["case"], "b0");
}

#[test]
fn human_text_verify_shows_the_tower_shape() {
    let out = run(&["verify", "bne0", "--num-specializations", "1", "--format", "human_text"]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("tower multiplicities: [3, 2]"), "got:\n{text}");
    assert!(text.contains("verdict[bne0]: not log canonical: E2 coefficient -2"));
}

#[test]
fn verdict_mismatch_exits_with_code_two() {
    // Forcing a into the prime subfield makes the order-9 group fail the
    // smallness gate, so the expected verdict cannot be reached.
    let out = run(&["verify", "bne0", "--num-specializations", "1", "--forced-a", "2"]);
    assert_eq!(code_of(&out), 2);
}

#[test]
fn strict_mode_exits_with_code_four_on_flagged_terms() {
    // The reference tables carry anomalous rows that are always flagged, so
    // fail_on_mismatch strictness turns a clean run into exit code 4.
    let out = run(&[
        "verify",
        "b0",
        "--num-specializations",
        "1",
        "--strictness",
        "fail_on_mismatch",
    ]);
    assert_eq!(code_of(&out), 4);
}

#[test]
fn hard_errors_exit_with_code_three() {
    let out = run(&["parse", "--ring", "x1,x2,x3,x4", "x1 + "]);
    assert_eq!(code_of(&out), 3);
    assert!(stderr_of(&out).contains("error:"));

    let starved = run(&["verify", "b0", "--num-specializations", "1", "--groebner-budget", "10"]);
    assert_eq!(code_of(&starved), 3, "a starved reduction budget is a hard error");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let path = temp_path("bad_config.txt");
    fs::write(&path, "num_specializations = 1\nbudget = 5\n").unwrap();
    let out = run(&["verify", "b0", "--config", path.to_str().unwrap()]);
    assert_eq!(code_of(&out), 3);
    assert!(stderr_of(&out).contains("unknown key"));
    let _ = fs::remove_file(&path);
}

#[test]
fn config_file_applies_and_flags_take_precedence() {
    let path = temp_path("config.txt");
    fs::write(&path, "num_specializations = 1\nstrictness = fail_on_mismatch\n").unwrap();
    let from_file = run(&["verify", "b0", "--config", path.to_str().unwrap()]);
    assert_eq!(code_of(&from_file), 4, "file strictness applies");
    let overridden = run(&[
        "verify",
        "b0",
        "--config",
        path.to_str().unwrap(),
        "--strictness",
        "report_typos",
    ]);
    assert_eq!(code_of(&overridden), 0, "the flag overrides the file");
    let _ = fs::remove_file(&path);
}

#[test]
fn environment_budget_applies_and_flags_override_it() {
    let args = ["verify", "b0", "--num-specializations", "1"];
    let starved = run_with_env(&args, "WILDQUOT_GROEBNER_BUDGET", "10");
    assert_eq!(code_of(&starved), 3, "the environment budget is honored");
    let rescued = bin()
        .args(args)
        .args(["--groebner-budget", "5000000"])
        .env("WILDQUOT_GROEBNER_BUDGET", "10")
        .output()
        .expect("binary runs");
    assert_eq!(code_of(&rescued), 0, "the flag overrides the environment");
}

#[test]
fn parse_prints_the_canonical_form_stably() {
    let out = run(&["parse", "--ring", "x1,x2,x3,x4", "x2^9 - x3^2 + x1^9*x4"]);
    assert_eq!(code_of(&out), 0);
    let printed = stdout_of(&out);
    assert_eq!(printed, "x1^9*x4 + x2^9 + 2*x3^2\n");
    // Feeding the canonical form back in reproduces it exactly.
    let again = run(&["parse", "--ring", "x1,x2,x3,x4", printed.trim_end()]);
    assert_eq!(stdout_of(&again), printed);
}

#[test]
fn rst_subcommand_classifies_the_cyclic_group() {
    let out = run(&["rst", "--order", "7", "--exps", "1,2,4"]);
    assert_eq!(code_of(&out), 0);
    assert!(stdout_of(&out).contains("\"classification\": \"canonical_not_terminal\""));

    let text = run(&["rst", "--order", "7", "--exps", "1,2,5", "--format", "human_text"]);
    assert_eq!(code_of(&text), 0);
    let body = stdout_of(&text);
    assert!(body.contains("classification: terminal"), "got:\n{body}");
    assert!(body.contains("8/7"), "exact fractional age is printed: {body}");
}

#[test]
fn lemmas_subcommand_verifies_the_group_facts() {
    let out = run(&["lemmas", "--format", "human_text"]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("centralizer: order 9"), "got:\n{text}");
    assert!(text.contains("rank 1: 364 subgroups (312 small, 52 non-small)"));
    assert!(text.contains("rank 2: 130 subgroups (0 small, 130 non-small)"));
}

#[test]
fn invariants_subcommand_reports_degrees_and_dimensions() {
    let out = run(&["invariants", "--cap", "12", "--format", "human_text"]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("generator degrees [1, 2, 9, 9]"), "got:\n{text}");
    assert!(text.contains("generator degrees [1, 3, 5, 9]"));
    assert!(text.contains("dimensions [1, 2, 2, 3, 3, 4, 4, 5, 7]"));
    assert!(text.contains("dimensions [1, 1, 2, 2, 3, 4, 4, 5, 7]"));
}

#[test]
fn reports_can_be_written_to_a_file() {
    let path = temp_path("report.json");
    let out = run(&[
        "verify",
        "b0",
        "--num-specializations",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 0);
    assert!(stdout_of(&out).is_empty(), "the report goes to the file, not stdout");
    let written = fs::read_to_string(&path).expect("report file written");
    assert!(written.contains("\"final_ledger\""));
    let _ = fs::remove_file(&path);
}
