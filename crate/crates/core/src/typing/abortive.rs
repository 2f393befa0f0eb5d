//! Typing rules of the abortive calculus (callcc/throw), both strategies.
//!
//! The checker is syntax-directed: binder annotations supply the types that
//! the rules leave free, so every term has at most one type up to renaming.

use std::sync::Arc;
use super::{check_closed_plain, TypeEnvD, TypeEnvG, TypeError, TypeErrorKind};
use crate::alpha::alpha_eq_type;
use crate::subst::subst_type;
use crate::surface::pretty_type;
use crate::syntax::{fresh_name, validate, validate_context, validate_type, CalcMode, ContType, EvalContext, Frame, Term, Type};

struct Checker {
    /// Answer types of every reified context met, when collecting.
    answers: Option<Vec<Type>>,
}

fn expect_eq(expected: &Type, actual: &Type) -> Result<(), TypeError> {
    if alpha_eq_type(expected, actual) {
        Ok(())
    } else {
        Err(TypeError::mismatch(expected, actual))
    }
}

impl Checker {
    fn term(&mut self, g: &mut TypeEnvG, d: &mut TypeEnvD, t: &Term) -> Result<Type, TypeError> {
        self.term_inner(g, d, t).map_err(|e| e.at(t))
    }

    fn term_inner(&mut self, g: &mut TypeEnvG, d: &mut TypeEnvD, t: &Term) -> Result<Type, TypeError> {
        match t {
            Term::Var(x) => g
                .lookup(x)
                .cloned()
                .ok_or_else(|| TypeError::new(TypeErrorKind::UnboundVar, format!("unbound variable `{x}`"))),
            Term::Lam(x, s, body) => {
                g.0.push((x.clone(), s.clone()));
                let r = self.term(g, d, body);
                g.0.pop();
                Ok(Type::arrow(s.clone(), r?))
            }
            Term::App(f, a) => {
                let tf = self.term(g, d, f)?;
                let ta = self.term(g, d, a)?;
                match tf {
                    Type::Arrow(s, r) => {
                        expect_eq(&s, &ta).map_err(|e| e.at(a))?;
                        Ok((*r).clone())
                    }
                    other => Err(TypeError::new(
                        TypeErrorKind::NotArrow,
                        format!("`{}` is applied to an argument", pretty_type(&other)),
                    )
                    .at(f)),
                }
            }
            Term::TyLam(a, body) => {
                if g.mentions_type_var(a) || d.mentions_type_var(a) {
                    return Err(TypeError::new(
                        TypeErrorKind::FtvEscape,
                        format!("type variable `{a}` is free in the environment"),
                    ));
                }
                Ok(Type::Forall(a.clone(), Arc::new(self.term(g, d, body)?)))
            }
            Term::TyApp(f, v) => match self.term(g, d, f)? {
                Type::Forall(a, s) => Ok(subst_type(&s, &a, v)),
                other => Err(TypeError::new(
                    TypeErrorKind::NotForall,
                    format!("`{}` is applied to a type", pretty_type(&other)),
                )
                .at(f)),
            },
            Term::Callcc(k, c, body) => {
                let ContType::Abort(s) = c else {
                    return Err(TypeError::new(TypeErrorKind::ModeViolation, "callcc binder needs an `S cont` annotation"));
                };
                d.0.push((k.clone(), c.clone()));
                let r = self.term(g, d, body);
                d.0.pop();
                expect_eq(s, &r?)?;
                Ok(s.clone())
            }
            Term::Throw(k, ann, body) => {
                let hole = match d.lookup(k) {
                    Some(ContType::Abort(s)) => s.clone(),
                    Some(_) => return Err(TypeError::new(TypeErrorKind::ModeViolation, format!("`{k}` has a delimited type"))),
                    None => {
                        return Err(TypeError::new(
                            TypeErrorKind::UnboundVar,
                            format!("unbound continuation variable `{k}`"),
                        ))
                    }
                };
                let tb = self.term(g, d, body)?;
                expect_eq(&hole, &tb).map_err(|e| e.at(body))?;
                result_annotation(ann)
            }
            Term::ThrowCtx(e, ann, body) => {
                let tb = self.term(g, d, body)?;
                // Reified contexts are closed: `⊢ E : S cont` has no environment.
                let answer = self.context(&mut TypeEnvG::default(), &mut TypeEnvD::default(), e, &tb)?;
                if let Some(out) = self.answers.as_mut() {
                    out.push(answer);
                }
                result_annotation(ann)
            }
            Term::Shift(..) | Term::Reset(_) => {
                Err(TypeError::new(TypeErrorKind::ModeViolation, "shift/reset in the abortive calculus"))
            }
        }
    }

    /// `⊢ E : hole cont`, returning the type of `E[x]` for `x : hole`.
    fn context(&mut self, g: &mut TypeEnvG, d: &mut TypeEnvD, e: &EvalContext, hole: &Type) -> Result<Type, TypeError> {
        let mut cur = hole.clone();
        for f in e.frames_inner_first() {
            cur = match f {
                Frame::Fun { param, ann, body } => {
                    expect_eq(ann, &cur)?;
                    g.0.push((param.clone(), ann.clone()));
                    let r = self.term(g, d, body);
                    g.0.pop();
                    r?
                }
                Frame::Arg(a) => match cur {
                    Type::Arrow(s, r) => {
                        let ta = self.term(g, d, a)?;
                        expect_eq(&s, &ta).map_err(|e| e.at(a))?;
                        (*r).clone()
                    }
                    other => {
                        return Err(TypeError::new(
                            TypeErrorKind::NotArrow,
                            format!("context applies a hole of type `{}`", pretty_type(&other)),
                        ))
                    }
                },
                Frame::TyArg(v) => match cur {
                    Type::Forall(a, s) => subst_type(&s, &a, v),
                    other => {
                        return Err(TypeError::new(
                            TypeErrorKind::NotForall,
                            format!("context type-applies a hole of type `{}`", pretty_type(&other)),
                        ))
                    }
                },
                Frame::Throw(e0, ann) => {
                    let answer = self.context(g, d, e0, &cur)?;
                    if let Some(out) = self.answers.as_mut() {
                        out.push(answer);
                    }
                    result_annotation(ann)?
                }
            };
        }
        Ok(cur)
    }

    /// Hole type of `E`, driven by its innermost frame; `requested` for `[]`.
    fn hole_type(&mut self, g: &mut TypeEnvG, d: &mut TypeEnvD, frames: &[&Frame], requested: &Type) -> Result<Type, TypeError> {
        let Some((inner, outer)) = frames.split_first() else {
            return Ok(requested.clone());
        };
        Ok(match inner {
            Frame::Fun { ann, .. } => ann.clone(),
            Frame::Arg(a) => {
                let s = self.term(g, d, a)?;
                Type::arrow(s, self.hole_type(g, d, outer, requested)?)
            }
            Frame::TyArg(_) => {
                let rest = self.hole_type(g, d, outer, requested)?;
                let a = fresh_name("a", &rest.ftv());
                Type::Forall(a, Arc::new(rest))
            }
            Frame::Throw(e0, _) => {
                let inner_frames: Vec<&Frame> = e0.frames_inner_first().collect();
                self.hole_type(g, d, &inner_frames, requested)?
            }
        })
    }
}

fn result_annotation(ann: &Option<Type>) -> Result<Type, TypeError> {
    ann.clone()
        .ok_or_else(|| TypeError::new(TypeErrorKind::ModeViolation, "abortive throw without a result annotation"))
}

fn prepare(t: &Term, mode: CalcMode) -> Result<(), TypeError> {
    if mode.is_delimited() {
        return Err(TypeError::new(TypeErrorKind::ModeViolation, "abortive checker used in delimited mode"));
    }
    validate(t, mode).map_err(|e| TypeError::from(e).at(t))
}

/// `Γ; Δ ⊢ t : S`.
pub fn infer_term(g: &TypeEnvG, d: &TypeEnvD, t: &Term, mode: CalcMode) -> Result<Type, TypeError> {
    prepare(t, mode)?;
    Checker { answers: None }.term(&mut g.clone(), &mut d.clone(), t)
}

/// `Γ; Δ ⊢ E : S cont`. The hole type is fixed by the innermost frame;
/// an empty context gets `requested`.
pub fn infer_context(g: &TypeEnvG, d: &TypeEnvD, e: &EvalContext, requested: &Type, mode: CalcMode) -> Result<ContType, TypeError> {
    validate_context(e, mode)?;
    validate_type(requested, mode)?;
    let mut ck = Checker { answers: None };
    let (mut g, mut d) = (g.clone(), d.clone());
    let frames: Vec<&Frame> = e.frames_inner_first().collect();
    let hole = ck.hole_type(&mut g, &mut d, &frames, requested)?;
    ck.context(&mut g, &mut d, e, &hole)?;
    Ok(ContType::Abort(hole))
}

/// The type of `E[x]` for a fresh `x : hole`.
pub fn answer_type(e: &EvalContext, hole: &Type, mode: CalcMode) -> Result<Type, TypeError> {
    validate_context(e, mode)?;
    Checker { answers: None }.context(&mut TypeEnvG::default(), &mut TypeEnvD::default(), e, hole)
}

/// A closed plain term and its type.
pub fn check_program(t: &Term, mode: CalcMode) -> Result<Type, TypeError> {
    check_closed_plain(t)?;
    infer_term(&TypeEnvG::default(), &TypeEnvD::default(), t, mode)
}

/// Type an intermediate program of a trace. Returns its type and the answer
/// types of all reified contexts inside it.
pub fn check_trace_program(t: &Term, mode: CalcMode) -> Result<(Type, Vec<Type>), TypeError> {
    prepare(t, mode)?;
    let mut ck = Checker { answers: Some(Vec::new()) };
    let ty = ck.term(&mut TypeEnvG::default(), &mut TypeEnvD::default(), t)?;
    Ok((ty, ck.answers.unwrap_or_default()))
}

/// The refined discipline: `t` has type `expected` and every reified context
/// in it has answer type `expected`.
pub fn check_refined(t: &Term, expected: &Type, mode: CalcMode) -> Result<(), TypeError> {
    let (ty, answers) = check_trace_program(t, mode)?;
    expect_eq(expected, &ty).map_err(|e| e.at(t))?;
    for a in &answers {
        expect_eq(expected, a).map_err(|e| TypeError { message: format!("reified context answer: {}", e.message), ..e }.at(t))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Name;

    fn u() -> Type {
        Type::forall("a", Type::arrow(Type::var("a"), Type::var("a")))
    }

    fn id_u() -> Term {
        Term::ty_lam("a", Term::lam("x", Type::var("a"), Term::var("x")))
    }

    const M: CalcMode = CalcMode::ABORTIVE_CBV;

    #[test]
    fn identity() {
        assert!(alpha_eq_type(&check_program(&id_u(), M).unwrap(), &u()));
    }

    #[test]
    fn callcc_throw() {
        let t = Term::callcc("k", ContType::Abort(u()), Term::throw("k", Some(u()), id_u()));
        assert!(alpha_eq_type(&check_program(&t, M).unwrap(), &u()));
    }

    #[test]
    fn forall_applied_is_not_arrow() {
        let e = check_program(&Term::app(id_u(), id_u()), M).unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::NotArrow);
    }

    #[test]
    fn program_shape_errors() {
        assert_eq!(check_program(&Term::var("x"), M).unwrap_err().kind, TypeErrorKind::UnboundVar);
        let t = Term::throw_ctx(EvalContext::hole(), Some(u()), id_u());
        assert_eq!(check_program(&t, M).unwrap_err().kind, TypeErrorKind::NotPlain);
        assert_eq!(check_program(&Term::reset(id_u()), M).unwrap_err().kind, TypeErrorKind::ModeViolation);
    }

    #[test]
    fn ftv_escape() {
        // fun (x:a) -> tfun a -> x
        let t = Term::lam("x", Type::var("a"), Term::ty_lam("a", Term::var("x")));
        assert_eq!(check_program(&t, M).unwrap_err().kind, TypeErrorKind::FtvEscape);
    }

    #[test]
    fn context_typing() {
        let g = TypeEnvG::default();
        let d = TypeEnvD::default();
        assert_eq!(infer_context(&g, &d, &EvalContext::hole(), &u(), M).unwrap(), ContType::Abort(u()));
        let fun = Frame::Fun { param: Name::new("x"), ann: u(), body: Box::new(Term::var("x")) };
        let e = EvalContext::hole().with_inner(fun);
        assert_eq!(infer_context(&g, &d, &e, &u(), M).unwrap(), ContType::Abort(u()));
        assert!(alpha_eq_type(&answer_type(&e, &u(), M).unwrap(), &u()));
        let e = EvalContext::hole().with_inner(Frame::Arg(id_u()));
        let t = Type::var("t");
        assert_eq!(infer_context(&g, &d, &e, &t, M).unwrap(), ContType::Abort(Type::arrow(u(), t)));
        let e = EvalContext::hole().with_inner(Frame::TyArg(u()));
        assert!(alpha_eq_type(&answer_type(&e, &u(), M).unwrap(), &Type::arrow(u(), u())));
        assert!(alpha_eq_type(&answer_type(&EvalContext::hole(), &u(), M).unwrap(), &u()));
    }

    #[test]
    fn throw_frame_context() {
        // ↑[] ← [] : U cont for any outer answer, here U -> U via a TyArg frame.
        let e = EvalContext::from_inner_first(vec![Frame::Throw(EvalContext::hole(), Some(u())), Frame::TyArg(u())]);
        let c = infer_context(&TypeEnvG::default(), &TypeEnvD::default(), &e, &u(), M).unwrap();
        assert_eq!(c, ContType::Abort(u()));
        assert!(alpha_eq_type(&answer_type(&e, &u(), M).unwrap(), &Type::arrow(u(), u())));
    }

    #[test]
    fn refined_discipline() {
        let t = Term::throw_ctx(EvalContext::hole(), Some(u()), id_u());
        assert!(check_refined(&t, &u(), M).is_ok());
        // A reified context whose answer differs from the program type.
        let e = EvalContext::hole().with_inner(Frame::TyArg(u()));
        let t = Term::throw_ctx(e, Some(u()), id_u());
        assert!(check_refined(&t, &u(), M).is_err());
    }
}
