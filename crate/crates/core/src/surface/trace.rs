//! JSON form of reduction and machine traces.
//!
//! A reduction trace is an array of records, one per program visited:
//!
//! ```text
//! { "step": 0, "rule": "callcc" | null, "program": "<pretty>",
//!   "decomposition": { "kind": "redex" | "value" | "program-value" | "stuck",
//!                      "focus": "<pretty>", "context": ["<frame>", ...],
//!                      "metacontext": [["<frame>", ...], ...] | null },
//!   "outcome": null | "value" | "program-value" | "fuel-exhausted" | "stuck",
//!   "reason": "<text>" }                       // stuck records only
//! ```
//!
//! `rule` names the rule that takes this program to the next one; the last
//! record has `rule: null` and a non-null `outcome`. Frames are listed
//! innermost first, metacontext entries top first.

use serde::Serialize;

use super::{pretty, pretty_frame};
use crate::machine::MachineState;
use crate::reduction::{decompose, Decomposition, Focus, Outcome, Program, Stuck, Trace};
use crate::syntax::{EvalContext, Metacontext};

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct DecompositionJson {
    pub kind: &'static str,
    pub focus: String,
    pub context: Vec<String>,
    pub metacontext: Option<Vec<Vec<String>>>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TraceRecord {
    pub step: u64,
    pub rule: Option<&'static str>,
    pub program: String,
    pub decomposition: DecompositionJson,
    pub outcome: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

fn frames(e: &EvalContext) -> Vec<String> {
    e.frames_inner_first().map(pretty_frame).collect()
}

fn meta(f: Option<&Metacontext>) -> Option<Vec<Vec<String>>> {
    f.map(|f| f.top_first().map(frames).collect())
}

pub fn decomposition_json(d: &Decomposition) -> DecompositionJson {
    let kind = match d.focus {
        Focus::Redex(..) => "redex",
        Focus::Value(_) => "value",
        Focus::ProgramValue(_) => "program-value",
    };
    DecompositionJson {
        kind,
        focus: pretty(d.focus.term()),
        context: frames(&d.context),
        metacontext: meta(d.metacontext.as_ref()),
    }
}

fn stuck_json(s: &Stuck) -> DecompositionJson {
    DecompositionJson {
        kind: "stuck",
        focus: pretty(&s.focus),
        context: frames(&s.context),
        metacontext: meta(s.metacontext.as_ref()),
    }
}

/// One record per step plus a final record carrying the outcome.
pub fn trace_records(tr: &Trace) -> Vec<TraceRecord> {
    let mut out: Vec<TraceRecord> = tr
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| TraceRecord {
            step: i as u64,
            rule: Some(s.rule.name()),
            program: pretty(&s.before),
            decomposition: decomposition_json(&s.decomposition),
            outcome: None,
            reason: None,
        })
        .collect();
    let step = tr.steps.len() as u64;
    let last = match &tr.outcome {
        Outcome::Normalized { .. } => {
            let d = tr.final_decomposition.as_ref().expect("normalized traces keep their final decomposition");
            let kind = if matches!(d.focus, Focus::ProgramValue(_)) { "program-value" } else { "value" };
            TraceRecord {
                step,
                rule: None,
                program: pretty(&d.reconstitute()),
                decomposition: decomposition_json(d),
                outcome: Some(kind),
                reason: None,
            }
        }
        Outcome::FuelExhausted { last, .. } => {
            let p = Program::new(tr.mode, last.clone());
            let decomposition = match decompose(&p) {
                Ok(d) => decomposition_json(&d),
                Err(s) => stuck_json(&s),
            };
            TraceRecord {
                step,
                rule: None,
                program: pretty(last),
                decomposition,
                outcome: Some("fuel-exhausted"),
                reason: None,
            }
        }
        Outcome::Stuck { stuck, at, .. } => TraceRecord {
            step,
            rule: None,
            program: pretty(at),
            decomposition: stuck_json(stuck),
            outcome: Some("stuck"),
            reason: Some(stuck.reason.to_string()),
        },
    };
    out.push(last);
    out
}

/// Pretty-printed JSON array of [`TraceRecord`]s.
pub fn emit_trace(tr: &Trace) -> String {
    serde_json::to_string_pretty(&trace_records(tr)).expect("trace records serialize")
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct MachineRecord {
    pub trace: &'static str,
    pub step: u64,
    pub state: &'static str,
    pub term: Option<String>,
    pub context: Option<Vec<String>>,
    pub metacontext: Option<Vec<Vec<String>>>,
}

pub fn machine_record(step: u64, s: &MachineState) -> MachineRecord {
    let (term, context, metacontext) = match s {
        MachineState::Eval { term, ctx, meta: m } => (Some(pretty(term)), Some(frames(ctx)), meta(m.as_ref())),
        MachineState::Continue { ctx, value, meta: m } => (Some(pretty(value)), Some(frames(ctx)), meta(m.as_ref())),
        MachineState::ContinueMeta { meta: m, value } => (Some(pretty(value)), None, meta(Some(m))),
        MachineState::Done(v) => (Some(pretty(v)), None, None),
    };
    MachineRecord { trace: "machine", step, state: s.kind(), term, context, metacontext }
}
