use std::fs;
use std::path::PathBuf;

use fctl::reduction::{enumerate_decompositions, plug, redex_decompositions, trace, Outcome, Program};
use fctl::surface::{emit_trace, parse_source};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn load(name: &str) -> Program {
    let text = fs::read_to_string(golden(&format!("{name}.fctl"))).unwrap();
    let src = parse_source(&text, None).unwrap();
    Program::new(src.mode, src.term)
}

fn replay(name: &str, rules: &[&str]) {
    let tr = trace(&load(name), 100);
    let got: Vec<&str> = tr.steps.iter().map(|s| s.rule.name()).collect();
    assert_eq!(got, rules, "{name}");
    assert!(matches!(tr.outcome, Outcome::Normalized { steps, .. } if steps as usize == rules.len()));
    let expected = fs::read_to_string(golden(&format!("{name}.trace.json"))).unwrap();
    assert_eq!(emit_trace(&tr), expected.trim_end(), "{name}");
}

#[test]
fn callcc_throws_in_two_steps() {
    replay("callcc", &["callcc", "throw_v"]);
}

#[test]
fn shift_discarding_its_continuation() {
    replay("shift_discard", &["shift"]);
}

#[test]
fn shift_then_throw_then_reset() {
    replay("shift_throw", &["shift", "throw_v", "reset"]);
}

#[test]
fn application_has_three_decompositions() {
    let p = load("three_decompositions");
    let all = enumerate_decompositions(&p);
    assert_eq!(all.len(), 3);
    assert!(all.iter().all(|(t, e, _)| plug(t.clone(), e) == p.term));
    assert_eq!(redex_decompositions(&p).len(), 1);
}
