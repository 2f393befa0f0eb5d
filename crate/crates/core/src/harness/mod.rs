//! Generation of well-typed programs and the property suite run over them.

pub mod gen;
pub mod shrink;
pub mod suite;

pub use gen::{case_seed, gen_case, gen_programs, gen_typed_program, GenConfig, GenError};
pub use suite::{check_case, run_suite, Counterexample, Property, PropertyReport, SuiteConfig, SuiteReport};

use crate::reduction::StuckReason;
use crate::surface::parse_trace_term;
use crate::syntax::{CalcMode, Term};

/// A small program that gets stuck for the given reason. The typecheckers
/// must reject every one of them.
#[derive(Clone, Debug)]
pub struct StuckWitness {
    pub name: &'static str,
    pub mode: CalcMode,
    pub term: Term,
    pub reason: StuckReason,
}

pub fn stuck_witnesses() -> Vec<StuckWitness> {
    let id = "tfun a -> fun (x:a) -> x";
    let idd = "tfun a -> fun (x:a) -> x";
    let u = "forall a. a -> a";
    let cases: [(&str, CalcMode, String, StuckReason); 8] = [
        ("free-variable", CalcMode::ABORTIVE_CBV, format!("({id}) [{u}] y"), StuckReason::FreeVariable("y".into())),
        (
            "free-continuation",
            CalcMode::ABORTIVE_CBV,
            format!("throw[{u}] k ({id})"),
            StuckReason::FreeContinuation("k".into()),
        ),
        ("type-abstraction-applied", CalcMode::ABORTIVE_CBV, format!("({id}) ({id})"), StuckReason::TypeAbstractionApplied),
        (
            "abstraction-type-applied",
            CalcMode::ABORTIVE_CBN,
            format!("(fun (x : {u}) -> x) [{u}]"),
            StuckReason::AbstractionTypeApplied,
        ),
        (
            "type-abstraction-applied-delimited",
            CalcMode::DELIMITED_CBV,
            format!("reset (({idd}) ({idd}))"),
            StuckReason::TypeAbstractionApplied,
        ),
        (
            "abstraction-type-applied-delimited",
            CalcMode::DELIMITED_CBN,
            format!("reset ((fun (x : {{a, a, a}}) -> x) [{u}])"),
            StuckReason::AbstractionTypeApplied,
        ),
        ("free-variable-delimited", CalcMode::DELIMITED_CBV, "reset y".to_string(), StuckReason::FreeVariable("y".into())),
        ("not-reset-wrapped", CalcMode::DELIMITED_CBV, format!("({idd}) [{u}]"), StuckReason::NotResetWrapped),
    ];
    cases
        .into_iter()
        .map(|(name, mode, src, reason)| StuckWitness {
            name,
            mode,
            term: parse_trace_term(&src, mode).unwrap_or_else(|e| panic!("witness {name}: {e}")),
            reason,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{evaluate, Outcome, Program};
    use crate::typing::check_program;

    #[test]
    fn witnesses_get_stuck_and_are_rejected() {
        for w in stuck_witnesses() {
            match evaluate(&Program::new(w.mode, w.term.clone()), 100) {
                Outcome::Stuck { stuck, .. } => assert_eq!(stuck.reason, w.reason, "{}", w.name),
                other => panic!("{}: {other:?}", w.name),
            }
            assert!(check_program(&w.term, w.mode).is_err(), "{}", w.name);
        }
    }
}
