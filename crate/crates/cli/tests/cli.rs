use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn golden(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/golden")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn fctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fctl")).args(args).output().expect("binary runs")
}

fn fctl_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fctl"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn source(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".fctl").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

const ID: &str = "#mode abortive cbv\ntfun a -> fun (x:a) -> x\n";

#[test]
fn check_prints_the_type() {
    let f = source(ID);
    let o = fctl(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "forall a. a -> a\n");
}

#[test]
fn check_reports_type_and_parse_errors() {
    let f = source("#mode abortive cbv\n(tfun a -> fun (x:a) -> x) (tfun a -> fun (x:a) -> x)\n");
    let o = fctl(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("type error"));
    let f = source("#mode abortive cbv\nfun (x:) -> x\n");
    let o = fctl(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:"), "positions are reported");
    let o = fctl(&["check", "/nonexistent/file.fctl"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn missing_header_is_an_error_unless_the_mode_is_given() {
    let f = source("tfun a -> fun (x:a) -> x\n");
    let path = f.path().to_str().unwrap();
    assert_eq!(code(&fctl(&["check", path])), 1);
    let o = fctl(&["check", path, "--mode", "abortive", "cbn"]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&fctl(&["check", path, "--mode", "abortive", "cbx"])), 1);
}

#[test]
fn eval_callcc_takes_two_steps() {
    let o = fctl(&["eval", &golden("callcc.fctl"), "--fuel", "100"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "tfun a -> fun (x:a) -> x\nsteps: 2\n");
}

#[test]
fn eval_reads_stdin() {
    let o = fctl_stdin(&["eval", "-"], ID);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("steps: 0\n"));
}

#[test]
fn eval_exit_codes() {
    let stuck = source("#mode abortive cbv\n(tfun a -> fun (x:a) -> x) (tfun a -> fun (x:a) -> x)\n");
    assert_eq!(code(&fctl(&["eval", stuck.path().to_str().unwrap()])), 2);
    let long = source("#mode abortive cbv\n(tfun a -> fun (x:a) -> x) [forall a. a -> a] (tfun a -> fun (x:a) -> x)\n");
    assert_eq!(code(&fctl(&["eval", long.path().to_str().unwrap(), "--fuel", "1"])), 3);
    assert_eq!(code(&fctl(&["eval", long.path().to_str().unwrap(), "--fuel", "2"])), 0);
}

#[test]
fn both_engines_agree_on_the_golden_programs() {
    for name in ["callcc.fctl", "shift_discard.fctl", "shift_throw.fctl", "three_decompositions.fctl"] {
        let o = fctl(&["eval", &golden(name), "--engine", "both", "--json"]);
        assert_eq!(code(&o), 0, "{name}");
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["agree"], Value::Bool(true));
        assert_eq!(v["reduction"]["value"], v["machine"]["value"]);
    }
}

#[test]
fn trace_matches_the_golden_file() {
    for name in ["callcc", "shift_discard", "shift_throw"] {
        let o = fctl(&["trace", &golden(&format!("{name}.fctl"))]);
        assert_eq!(code(&o), 0);
        let expected = std::fs::read_to_string(golden(&format!("{name}.trace.json"))).unwrap();
        assert_eq!(stdout(&o).trim_end(), expected.trim_end(), "{name}");
    }
    let o = fctl(&["trace", &golden("shift_throw.fctl"), "--engine", "machine"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().last().unwrap()["state"], "done");
}

#[test]
fn step_applies_n_steps() {
    let o = fctl(&["step", "1", &golden("callcc.fctl")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("throw[forall a. a -> a] ^[] "));
    let o = fctl(&["step", "10", &golden("shift_throw.fctl"), "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rules"], serde_json::json!(["shift", "throw_v", "reset"]));
    assert_eq!(v["finished"], Value::Bool(true));
}

#[test]
fn decompose_one_or_all() {
    let path = golden("three_decompositions.fctl");
    let o = fctl(&["decompose", &path]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("kind: redex (beta_v)\n"));
    let o = fctl(&["decompose", &path, "--all", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["count"], 3);
    let redexes = v["decompositions"].as_array().unwrap().iter().filter(|d| !d["redex"].is_null()).count();
    assert_eq!(redexes, 1);
}

#[test]
fn fuzz_passes_and_is_stable() {
    let args = ["fuzz", "--mode", "delimited", "cbv", "--count", "60", "--seed", "42", "--depth", "6", "--json"];
    let a = fctl(&args);
    assert_eq!(code(&a), 0, "{}", stdout(&a));
    let b = fctl(&args);
    assert_eq!(stdout(&a), stdout(&b));
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["generated"], 60);
    assert!(v.get("timings").is_none());
    let text = fctl(&["fuzz", "--mode", "abortive", "cbn", "--count", "20", "--seed", "7"]);
    assert_eq!(code(&text), 0);
    assert!(stdout(&text).contains("termination"));
}

#[test]
fn malformed_input_never_panics() {
    for junk in ["", "#mode", "#mode delimited cbv\nreset (", "#mode abortive cbv\n^[ ]", "#mode abortive cbv\n)))"] {
        let o = fctl_stdin(&["eval", "-"], junk);
        assert_eq!(code(&o), 1, "{junk:?}");
        assert!(!String::from_utf8_lossy(&o.stderr).contains("panicked"));
    }
}
