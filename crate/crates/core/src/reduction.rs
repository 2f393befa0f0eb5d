//! Reduction semantics: decomposition into redex and context, contraction,
//! and fuel-bounded evaluation for the four calculi.
//!
//! A delimited program is `⟨t⟩`. Its decompositions are triples `(r, E, F)`
//! with `⟨t⟩ = plug_meta(⟨plug(r, E)⟩, F)`: the outermost reset is implicit,
//! entering a reset pushes the current context onto `F`, and a program value
//! is `⟨v⟩` with empty `E` and `F`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::subst::{subst_cont, subst_term, subst_type_in_term};
use crate::syntax::{CalcMode, EvalContext, Frame, Metacontext, Name, Term};

pub const DEFAULT_FUEL: u64 = 100_000;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    BetaV,
    BetaN,
    BetaT,
    Callcc,
    ThrowV,
    ThrowN,
    Shift,
    Reset,
}

impl Rule {
    pub const ALL: [Rule; 8] =
        [Rule::BetaV, Rule::BetaN, Rule::BetaT, Rule::Callcc, Rule::ThrowV, Rule::ThrowN, Rule::Shift, Rule::Reset];

    pub fn name(self) -> &'static str {
        match self {
            Rule::BetaV => "beta_v",
            Rule::BetaN => "beta_n",
            Rule::BetaT => "beta_T",
            Rule::Callcc => "callcc",
            Rule::ThrowV => "throw_v",
            Rule::ThrowN => "throw_n",
            Rule::Shift => "shift",
            Rule::Reset => "reset",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == s)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why a program cannot take a step although it is not a value.
#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum StuckReason {
    #[error("free variable `{0}`")]
    FreeVariable(Name),
    #[error("throw to free continuation variable `{0}`")]
    FreeContinuation(Name),
    #[error("type abstraction applied to a term")]
    TypeAbstractionApplied,
    #[error("term abstraction applied to a type")]
    AbstractionTypeApplied,
    #[error("`{0}` is not part of this calculus")]
    WrongCalculus(&'static str),
    #[error("delimited program is not wrapped in a reset")]
    NotResetWrapped,
}

/// A stuck program together with the context in which evaluation got stuck.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Stuck {
    pub reason: StuckReason,
    pub focus: Term,
    pub context: EvalContext,
    pub metacontext: Option<Metacontext>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Focus {
    Redex(Term, Rule),
    Value(Term),
    /// The payload `v` of a finished delimited program `⟨v⟩`.
    ProgramValue(Term),
}

impl Focus {
    pub fn term(&self) -> &Term {
        match self {
            Focus::Redex(t, _) | Focus::Value(t) | Focus::ProgramValue(t) => t,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Decomposition {
    pub focus: Focus,
    pub context: EvalContext,
    /// Present exactly in the delimited calculus.
    pub metacontext: Option<Metacontext>,
}

impl Decomposition {
    pub fn reconstitute(&self) -> Term {
        reassemble(self.focus.term().clone(), &self.context, self.metacontext.as_ref())
    }
}

/// A program paired with the calculus it runs in.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Program {
    pub mode: CalcMode,
    pub term: Term,
}

impl Program {
    pub fn new(mode: CalcMode, term: Term) -> Self {
        Program { mode, term }
    }
}

/// `E[t]`, folding frames innermost-out.
pub fn plug(t: Term, e: &EvalContext) -> Term {
    e.frames_inner_first().fold(t, |acc, f| f.wrap(acc))
}

/// `plug_meta(t, •) = t`, `plug_meta(t, E·F) = plug_meta(⟨E[t]⟩, F)`.
pub fn plug_meta(t: Term, f: &Metacontext) -> Term {
    f.top_first().fold(t, |acc, e| Term::Reset(Box::new(plug(acc, e))))
}

/// Rebuild a program from a configuration; `meta` is `Some` in delimited mode.
pub fn reassemble(t: Term, e: &EvalContext, meta: Option<&Metacontext>) -> Term {
    match meta {
        None => plug(t, e),
        Some(f) => plug_meta(Term::Reset(Box::new(plug(t, e))), f),
    }
}

/// The rule that contracts `t` when it sits in an evaluation position.
pub fn redex_rule(t: &Term, mode: CalcMode) -> Option<Rule> {
    match t {
        Term::App(f, a) => match **f {
            Term::Lam(..) if mode.is_cbn() => Some(Rule::BetaN),
            Term::Lam(..) if a.is_value() => Some(Rule::BetaV),
            _ => None,
        },
        Term::TyApp(f, _) if matches!(**f, Term::TyLam(..)) => Some(Rule::BetaT),
        Term::Callcc(..) if !mode.is_delimited() => Some(Rule::Callcc),
        Term::Shift(..) if mode.is_delimited() => Some(Rule::Shift),
        Term::Reset(b) if mode.is_delimited() && b.is_value() => Some(Rule::Reset),
        Term::ThrowCtx(_, _, b) => {
            if mode.is_cbn() {
                Some(Rule::ThrowN)
            } else if b.is_value() {
                Some(Rule::ThrowV)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// The unique decomposition of a program, or why there is none.
pub fn decompose(p: &Program) -> Result<Decomposition, Stuck> {
    let mode = p.mode;
    let mut ctx = EvalContext::hole();
    let mut meta = if mode.is_delimited() { Some(Metacontext::empty()) } else { None };
    let mut cur = if mode.is_delimited() {
        match &p.term {
            Term::Reset(b) => &**b,
            other => {
                return Err(Stuck {
                    reason: StuckReason::NotResetWrapped,
                    focus: other.clone(),
                    context: ctx,
                    metacontext: meta,
                })
            }
        }
    } else {
        &p.term
    };
    loop {
        let stuck = |reason, focus: &Term, context: EvalContext, metacontext: Option<Metacontext>| {
            Err(Stuck { reason, focus: focus.clone(), context, metacontext })
        };
        if let Some(rule) = redex_rule(cur, mode) {
            return Ok(Decomposition { focus: Focus::Redex(cur.clone(), rule), context: ctx, metacontext: meta });
        }
        match cur {
            Term::Lam(..) | Term::TyLam(..) => {
                // Descent never enters a value position, so a value here is the whole program.
                debug_assert!(ctx.is_hole() && meta.as_ref().is_none_or(Metacontext::is_empty));
                let focus = if mode.is_delimited() { Focus::ProgramValue(cur.clone()) } else { Focus::Value(cur.clone()) };
                return Ok(Decomposition { focus, context: ctx, metacontext: meta });
            }
            Term::Var(x) => return stuck(StuckReason::FreeVariable(x.clone()), cur, ctx, meta),
            Term::Throw(k, ..) => return stuck(StuckReason::FreeContinuation(k.clone()), cur, ctx, meta),
            Term::Callcc(..) => return stuck(StuckReason::WrongCalculus("callcc"), cur, ctx, meta),
            Term::Shift(..) => return stuck(StuckReason::WrongCalculus("shift"), cur, ctx, meta),
            Term::App(f, a) => match &**f {
                Term::TyLam(..) => return stuck(StuckReason::TypeAbstractionApplied, cur, ctx, meta),
                Term::Lam(param, ann, body) => {
                    // CBV with a non-value argument; CBN always matched a redex above.
                    ctx.push_inner(Frame::Fun { param: param.clone(), ann: ann.clone(), body: body.clone() });
                    cur = a;
                }
                _ => {
                    ctx.push_inner(Frame::Arg((**a).clone()));
                    cur = f;
                }
            },
            Term::TyApp(f, ty) => match &**f {
                Term::Lam(..) => return stuck(StuckReason::AbstractionTypeApplied, cur, ctx, meta),
                _ => {
                    ctx.push_inner(Frame::TyArg(ty.clone()));
                    cur = f;
                }
            },
            Term::ThrowCtx(e, ann, b) => {
                ctx.push_inner(Frame::Throw(e.clone(), ann.clone()));
                cur = b;
            }
            Term::Reset(b) => match meta.as_mut() {
                None => return stuck(StuckReason::WrongCalculus("reset"), cur, ctx, meta),
                Some(f) => {
                    f.push(std::mem::take(&mut ctx));
                    cur = b;
                }
            },
        }
    }
}

/// Visit every split of a program into a focus, a context and (in the
/// delimited calculus) a metacontext that reassembles to it, following the
/// context grammar of the strategy. The visitor sees borrowed state, so only
/// the splits it decides to keep are copied.
pub fn visit_decompositions(p: &Program, mut visit: impl FnMut(&Term, &EvalContext, Option<&Metacontext>)) {
    let mode = p.mode;
    let mut ctx = EvalContext::hole();
    if mode.is_delimited() {
        if let Term::Reset(b) = &p.term {
            let mut meta = Metacontext::empty();
            walk(b, mode, &mut ctx, Some(&mut meta), &mut visit);
        }
    } else {
        walk(&p.term, mode, &mut ctx, None, &mut visit);
    }
}

fn walk(
    t: &Term,
    mode: CalcMode,
    ctx: &mut EvalContext,
    mut meta: Option<&mut Metacontext>,
    visit: &mut impl FnMut(&Term, &EvalContext, Option<&Metacontext>),
) {
    visit(t, ctx, meta.as_deref());
    match t {
        Term::App(f, a) => {
            ctx.push_inner(Frame::Arg((**a).clone()));
            walk(f, mode, ctx, meta.as_deref_mut(), visit);
            ctx.pop_inner();
            if let (Term::Lam(param, ann, body), false) = (&**f, mode.is_cbn()) {
                ctx.push_inner(Frame::Fun { param: param.clone(), ann: ann.clone(), body: body.clone() });
                walk(a, mode, ctx, meta, visit);
                ctx.pop_inner();
            }
        }
        Term::TyApp(f, ty) => {
            ctx.push_inner(Frame::TyArg(ty.clone()));
            walk(f, mode, ctx, meta, visit);
            ctx.pop_inner();
        }
        Term::ThrowCtx(e, ann, b) if !mode.is_cbn() => {
            ctx.push_inner(Frame::Throw(e.clone(), ann.clone()));
            walk(b, mode, ctx, meta, visit);
            ctx.pop_inner();
        }
        Term::Reset(b) => {
            if let Some(f) = meta {
                f.push(std::mem::take(ctx));
                walk(b, mode, ctx, Some(&mut *f), visit);
                *ctx = f.pop().expect("pushed above");
            }
        }
        _ => {}
    }
}

/// Every decomposition of `p`, materialized. Brute force; used as an oracle.
pub fn enumerate_decompositions(p: &Program) -> Vec<(Term, EvalContext, Option<Metacontext>)> {
    let mut out = Vec::new();
    visit_decompositions(p, |t, e, f| out.push((t.clone(), e.clone(), f.cloned())));
    out
}

/// Only the decompositions whose focus is a redex of the program's mode.
pub fn redex_decompositions(p: &Program) -> Vec<(Term, EvalContext, Option<Metacontext>)> {
    let mut out = Vec::new();
    visit_decompositions(p, |t, e, f| {
        if redex_rule(t, p.mode).is_some() {
            out.push((t.clone(), e.clone(), f.cloned()));
        }
    });
    out
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StepResult {
    pub rule: Rule,
    pub before: Term,
    pub after: Term,
    pub decomposition: Decomposition,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Step {
    Stepped(StepResult),
    /// The program is a value (abortive) or a program value (delimited).
    Finished(Decomposition),
    Stuck(Stuck),
}

/// Contract the redex of a decomposition and rebuild the program.
pub fn contract(d: &Decomposition) -> Term {
    let Focus::Redex(r, rule) = &d.focus else {
        return d.reconstitute();
    };
    let e = &d.context;
    let meta = d.metacontext.as_ref();
    match (rule, r) {
        (Rule::BetaV | Rule::BetaN, Term::App(f, a)) => {
            let Term::Lam(x, _, body) = &**f else { unreachable!("checked by redex_rule") };
            reassemble(subst_term(body, x, a), e, meta)
        }
        (Rule::BetaT, Term::TyApp(f, ty)) => {
            let Term::TyLam(a, body) = &**f else { unreachable!("checked by redex_rule") };
            reassemble(subst_type_in_term(body, a, ty), e, meta)
        }
        (Rule::Callcc, Term::Callcc(k, _, body)) => plug(subst_cont(body, k, e), e),
        (Rule::Shift, Term::Shift(k, _, body)) => reassemble(subst_cont(body, k, e), &EvalContext::hole(), meta),
        (Rule::Reset, Term::Reset(v)) => reassemble((**v).clone(), e, meta),
        (Rule::ThrowV | Rule::ThrowN, Term::ThrowCtx(target, _, body)) => match meta {
            None => plug((**body).clone(), target),
            Some(f) => {
                let mut f = f.clone();
                f.push(e.clone());
                reassemble((**body).clone(), target, Some(&f))
            }
        },
        _ => unreachable!("rule {rule} does not match its redex"),
    }
}

pub fn step(p: &Program) -> Step {
    match decompose(p) {
        Err(s) => Step::Stuck(s),
        Ok(d) => match &d.focus {
            Focus::Redex(_, rule) => {
                let after = contract(&d);
                Step::Stepped(StepResult { rule: *rule, before: p.term.clone(), after, decomposition: d })
            }
            Focus::Value(_) | Focus::ProgramValue(_) => Step::Finished(d),
        },
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Outcome {
    /// The value `v`; for delimited programs the payload of `⟨v⟩`.
    Normalized { value: Term, steps: u64 },
    FuelExhausted { last: Term, steps: u64 },
    Stuck { stuck: Stuck, at: Term, steps: u64 },
}

impl Outcome {
    pub fn steps(&self) -> u64 {
        match self {
            Outcome::Normalized { steps, .. } | Outcome::FuelExhausted { steps, .. } | Outcome::Stuck { steps, .. } => {
                *steps
            }
        }
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self, Outcome::Normalized { .. })
    }
}

/// Step at most `fuel` times.
pub fn evaluate(p: &Program, fuel: u64) -> Outcome {
    run(p, fuel, None).0
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Trace {
    pub mode: CalcMode,
    pub steps: Vec<StepResult>,
    pub outcome: Outcome,
    /// Decomposition of the last program when it is a value.
    pub final_decomposition: Option<Decomposition>,
}

/// Like [`evaluate`], keeping every step.
pub fn trace(p: &Program, fuel: u64) -> Trace {
    let mut steps = Vec::new();
    let (outcome, final_decomposition) = run(p, fuel, Some(&mut |s| steps.push(s)));
    Trace { mode: p.mode, steps, outcome, final_decomposition }
}

/// Like [`evaluate`], passing every program visited to `visit`; the flag
/// marks the last one.
pub fn run_observed(p: &Program, fuel: u64, visit: &mut dyn FnMut(&Term, bool)) -> Outcome {
    let mut last: Option<Term> = None;
    let (outcome, _) = run(
        p,
        fuel,
        Some(&mut |s: StepResult| {
            visit(&s.before, false);
            last = Some(s.after);
        }),
    );
    visit(last.as_ref().unwrap_or(&p.term), true);
    outcome
}

fn run(
    p: &Program,
    fuel: u64,
    mut on_step: Option<&mut dyn FnMut(StepResult)>,
) -> (Outcome, Option<Decomposition>) {
    let mut cur = p.clone();
    let mut steps = 0;
    loop {
        let d = match decompose(&cur) {
            Err(stuck) => return (Outcome::Stuck { stuck, at: cur.term, steps }, None),
            Ok(d) => d,
        };
        let rule = match &d.focus {
            Focus::Value(v) | Focus::ProgramValue(v) => {
                let value = v.clone();
                return (Outcome::Normalized { value, steps }, Some(d));
            }
            Focus::Redex(_, rule) => *rule,
        };
        if steps >= fuel {
            return (Outcome::FuelExhausted { last: cur.term, steps }, None);
        }
        let after = contract(&d);
        let before = std::mem::replace(&mut cur.term, after);
        if let Some(f) = on_step.as_mut() {
            f(StepResult { rule, before, after: cur.term.clone(), decomposition: d });
        }
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::alpha_eq_term;
    use crate::syntax::{ContType, Type};

    fn u() -> Type {
        Type::forall("a", Type::arrow(Type::var("a"), Type::var("a")))
    }

    fn id_u() -> Term {
        Term::ty_lam("a", Term::lam("x", Type::var("a"), Term::var("x")))
    }

    fn ud() -> Type {
        let a = Type::var("a");
        Type::forall_d("a", Type::arrow_d(a.clone(), a.clone(), a.clone(), a.clone()), a.clone(), a)
    }

    fn id_ud() -> Term {
        id_u()
    }

    fn rules(t: &Trace) -> Vec<Rule> {
        t.steps.iter().map(|s| s.rule).collect()
    }

    #[test]
    fn plug_clauses() {
        let t = Term::var("t");
        assert_eq!(plug(t.clone(), &EvalContext::hole()), t);
        let lam = Term::lam("x", u(), Term::var("x"));
        let e = EvalContext::hole().with_inner(Frame::Fun { param: Name::new("x"), ann: u(), body: Box::new(Term::var("x")) });
        assert_eq!(plug(t.clone(), &e), Term::app(lam, t.clone()));
        let e = EvalContext::hole().with_inner(Frame::Throw(EvalContext::hole(), Some(u())));
        assert_eq!(plug(t.clone(), &e), Term::throw_ctx(EvalContext::hole(), Some(u()), t));
    }

    #[test]
    fn plug_meta_clauses() {
        assert_eq!(plug_meta(id_u(), &Metacontext::empty()), id_u());
        let f1 = Metacontext::from_top_first(vec![EvalContext::hole()]);
        assert_eq!(plug_meta(id_u(), &f1), Term::reset(id_u()));
        let f2 = Metacontext::from_top_first(vec![EvalContext::hole(), EvalContext::hole()]);
        assert_eq!(plug_meta(id_u(), &f2), Term::reset(Term::reset(id_u())));
    }

    #[test]
    fn three_decompositions() {
        let lam = Term::lam("x", u(), Term::var("x"));
        let p = Program::new(CalcMode::ABORTIVE_CBV, Term::app(lam, id_u()));
        let all = enumerate_decompositions(&p);
        assert_eq!(all.len(), 3);
        for (t, e, _) in &all {
            assert_eq!(plug(t.clone(), e), p.term);
        }
        assert_eq!(redex_decompositions(&p).len(), 1);
        assert_eq!(enumerate_decompositions(&Program::new(CalcMode::ABORTIVE_CBV, id_u())).len(), 1);
    }

    #[test]
    fn cbv_and_cbn_pick_different_redexes() {
        let inner = Term::app(Term::lam("y", u(), Term::var("y")), id_u());
        let t = Term::app(Term::lam("x", u(), Term::var("x")), inner.clone());
        let d = decompose(&Program::new(CalcMode::ABORTIVE_CBV, t.clone())).unwrap();
        assert_eq!(d.focus, Focus::Redex(inner, Rule::BetaV));
        assert!(matches!(d.context.innermost(), Some(Frame::Fun { .. })));
        let d = decompose(&Program::new(CalcMode::ABORTIVE_CBN, t.clone())).unwrap();
        assert_eq!(d.focus, Focus::Redex(t, Rule::BetaN));
        assert!(d.context.is_hole());
    }

    #[test]
    fn callcc_two_steps() {
        let t = Term::callcc("k", ContType::Abort(u()), Term::throw("k", Some(u()), id_u()));
        let tr = trace(&Program::new(CalcMode::ABORTIVE_CBV, t), 10);
        assert_eq!(rules(&tr), vec![Rule::Callcc, Rule::ThrowV]);
        assert_eq!(tr.steps[0].after, Term::throw_ctx(EvalContext::hole(), Some(u()), id_u()));
        assert_eq!(tr.outcome, Outcome::Normalized { value: id_u(), steps: 2 });
    }

    #[test]
    fn type_then_term_beta() {
        let t = Term::app(Term::ty_app(id_u(), u()), id_u());
        let tr = trace(&Program::new(CalcMode::ABORTIVE_CBV, t), 10);
        assert_eq!(rules(&tr), vec![Rule::BetaT, Rule::BetaV]);
        assert!(matches!(&tr.outcome, Outcome::Normalized { value, .. } if alpha_eq_term(value, &id_u())));
    }

    #[test]
    fn shift_discarding_k_takes_one_step() {
        let t = Term::reset(Term::shift("k", ContType::Delim(ud(), ud()), id_ud()));
        let d = decompose(&Program::new(CalcMode::DELIMITED_CBV, t.clone())).unwrap();
        assert!(matches!(d.focus, Focus::Redex(_, Rule::Shift)));
        assert!(d.context.is_hole());
        assert_eq!(d.metacontext, Some(Metacontext::empty()));
        let out = evaluate(&Program::new(CalcMode::DELIMITED_CBV, t), 10);
        assert_eq!(out, Outcome::Normalized { value: id_ud(), steps: 1 });
    }

    #[test]
    fn throw_pushes_then_reset_pops() {
        let t = Term::reset(Term::throw_ctx(EvalContext::hole(), None, id_ud()));
        let tr = trace(&Program::new(CalcMode::DELIMITED_CBV, t), 10);
        assert_eq!(rules(&tr), vec![Rule::ThrowV, Rule::Reset]);
        assert_eq!(tr.steps[0].after, Term::reset(Term::reset(id_ud())));
        assert_eq!(tr.steps[1].after, Term::reset(id_ud()));
    }

    #[test]
    fn shift_throw_three_steps() {
        let t = Term::reset(Term::shift("k", ContType::Delim(ud(), ud()), Term::throw("k", None, id_ud())));
        let tr = trace(&Program::new(CalcMode::DELIMITED_CBV, t), 10);
        assert_eq!(rules(&tr), vec![Rule::Shift, Rule::ThrowV, Rule::Reset]);
    }

    #[test]
    fn fuel_and_values() {
        assert_eq!(evaluate(&Program::new(CalcMode::ABORTIVE_CBV, id_u()), 1), Outcome::Normalized { value: id_u(), steps: 0 });
        let t = Term::app(Term::ty_app(id_u(), u()), id_u());
        assert!(matches!(evaluate(&Program::new(CalcMode::ABORTIVE_CBV, t), 1), Outcome::FuelExhausted { steps: 1, .. }));
    }

    #[test]
    fn stuck_programs() {
        let t = Term::app(id_u(), id_u());
        let out = evaluate(&Program::new(CalcMode::ABORTIVE_CBV, t), 10);
        assert!(matches!(out, Outcome::Stuck { stuck: Stuck { reason: StuckReason::TypeAbstractionApplied, .. }, .. }));
        let out = evaluate(&Program::new(CalcMode::DELIMITED_CBV, id_u()), 10);
        assert!(matches!(out, Outcome::Stuck { stuck: Stuck { reason: StuckReason::NotResetWrapped, .. }, .. }));
        let t = Term::ty_app(Term::lam("x", u(), Term::var("x")), u());
        let out = evaluate(&Program::new(CalcMode::ABORTIVE_CBN, t), 10);
        assert!(matches!(out, Outcome::Stuck { stuck: Stuck { reason: StuckReason::AbstractionTypeApplied, .. }, .. }));
    }

    #[test]
    fn nested_reset_decomposition() {
        // ⟨(⟨(λx.x) v⟩) w⟩: the inner redex sits under a pushed context.
        let inner = Term::app(Term::lam("x", ud(), Term::var("x")), id_ud());
        let t = Term::reset(Term::app(Term::reset(inner.clone()), id_ud()));
        let p = Program::new(CalcMode::DELIMITED_CBV, t.clone());
        let d = decompose(&p).unwrap();
        assert_eq!(d.focus, Focus::Redex(inner, Rule::BetaV));
        assert!(d.context.is_hole());
        assert_eq!(d.metacontext.as_ref().unwrap().len(), 1);
        assert_eq!(d.reconstitute(), t);
        assert_eq!(redex_decompositions(&p).len(), 1);
    }
}
