//! Abstract machines for the four calculi.
//!
//! Continuations are kept first-order as [`EvalContext`] and [`Metacontext`],
//! so a machine state is a decomposition in progress. The machine never
//! re-decomposes: each transition touches at most one frame.

use crate::reduction::{Program, StuckReason, DEFAULT_FUEL};
use crate::subst::{subst_cont, subst_term, subst_type_in_term};
use crate::syntax::{CalcMode, EvalContext, Frame, Metacontext, Term};

pub const DEFAULT_MACHINE_FUEL: u64 = 10 * DEFAULT_FUEL;

/// `meta` is `Some` exactly in the delimited calculus.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MachineState {
    Eval { term: Term, ctx: EvalContext, meta: Option<Metacontext> },
    Continue { ctx: EvalContext, value: Term, meta: Option<Metacontext> },
    ContinueMeta { meta: Metacontext, value: Term },
    Done(Term),
}

impl MachineState {
    pub fn kind(&self) -> &'static str {
        match self {
            MachineState::Eval { .. } => "eval",
            MachineState::Continue { .. } => "continue",
            MachineState::ContinueMeta { .. } => "continue-meta",
            MachineState::Done(_) => "done",
        }
    }

    fn frames(&self) -> usize {
        let meta_frames = |m: &Option<Metacontext>| m.as_ref().map_or(0, |f| f.frame_count() + f.len());
        match self {
            MachineState::Eval { ctx, meta, .. } | MachineState::Continue { ctx, meta, .. } => {
                ctx.len() + meta_frames(meta)
            }
            MachineState::ContinueMeta { meta, .. } => meta.frame_count() + meta.len(),
            MachineState::Done(_) => 0,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MachineOutcome {
    Normalized { value: Term, transitions: u64, max_frames: usize },
    FuelExhausted { transitions: u64 },
    Stuck { reason: StuckReason, transitions: u64 },
}

impl MachineOutcome {
    pub fn transitions(&self) -> u64 {
        match self {
            MachineOutcome::Normalized { transitions, .. }
            | MachineOutcome::FuelExhausted { transitions }
            | MachineOutcome::Stuck { transitions, .. } => *transitions,
        }
    }
}

pub fn initial_state(p: &Program) -> Result<MachineState, StuckReason> {
    if p.mode.is_delimited() {
        match &p.term {
            Term::Reset(t) => {
                Ok(MachineState::Eval { term: (**t).clone(), ctx: EvalContext::hole(), meta: Some(Metacontext::empty()) })
            }
            _ => Err(StuckReason::NotResetWrapped),
        }
    } else {
        Ok(MachineState::Eval { term: p.term.clone(), ctx: EvalContext::hole(), meta: None })
    }
}

/// One transition. `Done` is a fixed point and is not passed here.
pub fn transition(state: MachineState, mode: CalcMode) -> Result<MachineState, StuckReason> {
    use MachineState::*;
    Ok(match state {
        Eval { term, mut ctx, meta } => match term {
            Term::Lam(..) | Term::TyLam(..) => Continue { ctx, value: term, meta },
            Term::Var(x) => return Err(StuckReason::FreeVariable(x)),
            Term::Throw(k, ..) => return Err(StuckReason::FreeContinuation(k)),
            Term::App(f, a) => {
                ctx.push_inner(Frame::Arg(*a));
                Eval { term: *f, ctx, meta }
            }
            Term::TyApp(f, ty) => {
                ctx.push_inner(Frame::TyArg(ty));
                Eval { term: *f, ctx, meta }
            }
            Term::Callcc(k, _, body) => {
                if meta.is_some() {
                    return Err(StuckReason::WrongCalculus("callcc"));
                }
                Eval { term: subst_cont(&body, &k, &ctx), ctx, meta }
            }
            Term::Shift(k, _, body) => {
                if meta.is_none() {
                    return Err(StuckReason::WrongCalculus("shift"));
                }
                Eval { term: subst_cont(&body, &k, &ctx), ctx: EvalContext::hole(), meta }
            }
            Term::Reset(body) => match meta {
                None => return Err(StuckReason::WrongCalculus("reset")),
                Some(mut f) => {
                    f.push(ctx);
                    Eval { term: *body, ctx: EvalContext::hole(), meta: Some(f) }
                }
            },
            Term::ThrowCtx(target, ann, body) => {
                if mode.is_cbn() {
                    let meta = meta.map(|mut f| {
                        f.push(ctx);
                        f
                    });
                    Eval { term: *body, ctx: target, meta }
                } else {
                    ctx.push_inner(Frame::Throw(target, ann));
                    Eval { term: *body, ctx, meta }
                }
            }
        },
        Continue { mut ctx, value, meta } => match ctx.pop_inner() {
            None => match meta {
                None => Done(value),
                Some(f) => ContinueMeta { meta: f, value },
            },
            Some(Frame::Arg(arg)) => match value {
                Term::Lam(x, ann, body) => {
                    if mode.is_cbn() || arg.is_value() {
                        Eval { term: subst_term(&body, &x, &arg), ctx, meta }
                    } else {
                        ctx.push_inner(Frame::Fun { param: x, ann, body });
                        Eval { term: arg, ctx, meta }
                    }
                }
                _ => return Err(StuckReason::TypeAbstractionApplied),
            },
            Some(Frame::Fun { param, body, .. }) => Eval { term: subst_term(&body, &param, &value), ctx, meta },
            Some(Frame::TyArg(ty)) => match value {
                Term::TyLam(a, body) => Eval { term: subst_type_in_term(&body, &a, &ty), ctx, meta },
                _ => return Err(StuckReason::AbstractionTypeApplied),
            },
            Some(Frame::Throw(target, _)) => {
                let meta = meta.map(|mut f| {
                    f.push(ctx);
                    f
                });
                Continue { ctx: target, value, meta }
            }
        },
        ContinueMeta { mut meta, value } => match meta.pop() {
            None => Done(value),
            Some(ctx) => Continue { ctx, value, meta: Some(meta) },
        },
        Done(v) => Done(v),
    })
}

/// Run to completion or until `fuel` transitions have been made.
pub fn machine_eval(p: &Program, fuel: u64) -> MachineOutcome {
    machine_run(p, fuel, None)
}

/// As [`machine_eval`], reporting every state (including the first) to `observe`.
pub fn machine_run(p: &Program, fuel: u64, mut observe: Option<&mut dyn FnMut(&MachineState)>) -> MachineOutcome {
    let mut state = match initial_state(p) {
        Ok(s) => s,
        Err(reason) => return MachineOutcome::Stuck { reason, transitions: 0 },
    };
    let mut transitions = 0;
    let mut max_frames = 0;
    loop {
        if let Some(f) = observe.as_mut() {
            f(&state);
        }
        max_frames = max_frames.max(state.frames());
        if let MachineState::Done(value) = state {
            return MachineOutcome::Normalized { value, transitions, max_frames };
        }
        if transitions >= fuel {
            return MachineOutcome::FuelExhausted { transitions };
        }
        state = match transition(state, p.mode) {
            Ok(s) => s,
            Err(reason) => return MachineOutcome::Stuck { reason, transitions },
        };
        transitions += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::alpha_eq_term;
    use crate::reduction::{evaluate, Outcome};
    use crate::syntax::{ContType, Type};

    fn u() -> Type {
        Type::forall("a", Type::arrow(Type::var("a"), Type::var("a")))
    }

    fn id_u() -> Term {
        Term::ty_lam("a", Term::lam("x", Type::var("a"), Term::var("x")))
    }

    fn agree(p: &Program) {
        let r = evaluate(p, 1000);
        let m = machine_eval(p, 10_000);
        match (&r, &m) {
            (Outcome::Normalized { value: a, .. }, MachineOutcome::Normalized { value: b, .. }) => {
                assert!(alpha_eq_term(a, b), "{a:?} vs {b:?}")
            }
            (Outcome::Stuck { stuck, .. }, MachineOutcome::Stuck { reason, .. }) => assert_eq!(&stuck.reason, reason),
            _ => panic!("disagree: {r:?} vs {m:?}"),
        }
    }

    #[test]
    fn identity_is_done() {
        let m = machine_eval(&Program::new(CalcMode::ABORTIVE_CBV, id_u()), 10);
        assert!(matches!(m, MachineOutcome::Normalized { value, .. } if value == id_u()));
    }

    #[test]
    fn callcc_agrees() {
        let t = Term::callcc("k", ContType::Abort(u()), Term::throw("k", Some(u()), id_u()));
        agree(&Program::new(CalcMode::ABORTIVE_CBV, t.clone()));
        agree(&Program::new(CalcMode::ABORTIVE_CBN, t));
    }

    #[test]
    fn shift_throw_agrees() {
        let c = ContType::Delim(Type::var("s"), Type::var("s"));
        let t = Term::reset(Term::shift("k", c, Term::throw("k", None, id_u())));
        agree(&Program::new(CalcMode::DELIMITED_CBV, t.clone()));
        agree(&Program::new(CalcMode::DELIMITED_CBN, t));
    }

    #[test]
    fn stuck_agrees() {
        agree(&Program::new(CalcMode::ABORTIVE_CBV, Term::app(id_u(), id_u())));
        agree(&Program::new(CalcMode::DELIMITED_CBV, id_u()));
        agree(&Program::new(CalcMode::ABORTIVE_CBN, Term::ty_app(Term::lam("x", u(), Term::var("x")), u())));
    }

    #[test]
    fn fuel_counts_transitions() {
        let t = Term::app(Term::ty_app(id_u(), u()), id_u());
        let p = Program::new(CalcMode::ABORTIVE_CBV, t);
        assert!(matches!(machine_eval(&p, 2), MachineOutcome::FuelExhausted { transitions: 2 }));
        assert!(matches!(machine_eval(&p, 100), MachineOutcome::Normalized { .. }));
    }
}
