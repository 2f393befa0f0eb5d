//! Typing rules of the delimited calculus (shift/reset/throw), both strategies.
//!
//! A judgment `Γ; Δ; T ⊢ t : S; U` is represented as [`Judgment`]
//! `(S, T, U)`: `t` has type `S` in a context of type `(S, T) cont` and a
//! metacontext of type `not U`. The rules leave answer types free wherever a
//! term is pure; those choices become metavariables solved by first-order
//! unification.
//!
//! Type abstractions are checked with their binder renamed to a fresh rigid
//! variable. Each metavariable records which rigid variables were in scope
//! when it was created, and may only be solved with types mentioning those.

use std::sync::Arc;
use std::collections::{BTreeMap, BTreeSet};

use super::{check_closed_plain, TypeEnvD, TypeEnvG, TypeError, TypeErrorKind};
use crate::subst::{subst_type, subst_type_in_term};
use crate::surface::pretty_type;
use crate::syntax::{
    fresh_name, validate, validate_context, validate_type, CalcMode, ContType, EvalContext, Frame, MetaType,
    Metacontext, Name, Term, Type,
};

/// `(S, T, U)`: type, input answer type, output answer type.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Judgment {
    pub ty: Type,
    pub ans_in: Type,
    pub ans_out: Type,
}

impl Judgment {
    fn map(&self, mut f: impl FnMut(&Type) -> Type) -> Judgment {
        Judgment { ty: f(&self.ty), ans_in: f(&self.ans_in), ans_out: f(&self.ans_out) }
    }
}

/// What a derivation node concludes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Conclusion {
    Term(Judgment),
    /// `(hole, answer) cont`.
    Context(Type, Type),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Subject {
    Term(Term),
    Context(EvalContext),
}

/// A typing derivation recorded by the checker. Children appear in premise
/// order; a context node's children are its frame premises, outer context last.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    pub rule: &'static str,
    pub subject: Subject,
    pub conclusion: Conclusion,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn map_types(&self, f: &mut impl FnMut(&Type) -> Type) -> Derivation {
        let conclusion = match &self.conclusion {
            Conclusion::Term(j) => Conclusion::Term(j.map(&mut *f)),
            Conclusion::Context(s, t) => Conclusion::Context(f(s), f(t)),
        };
        Derivation {
            rule: self.rule,
            subject: self.subject.clone(),
            conclusion,
            children: self.children.iter().map(|c| c.map_types(f)).collect(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Derivation::size).sum::<usize>()
    }
}

struct MetaVar {
    solution: Option<Type>,
    /// Rigid variables the solution may mention.
    allowed: BTreeSet<Name>,
}

struct Checker {
    mode: CalcMode,
    metas: Vec<MetaVar>,
    /// Every rigid variable introduced so far.
    rigid: BTreeSet<Name>,
    /// Rigid variables in scope at the current point.
    scope: Vec<Name>,
    record: bool,
}

type Out = (Judgment, Option<Derivation>);

fn err(kind: TypeErrorKind, msg: impl Into<String>) -> TypeError {
    TypeError::new(kind, msg)
}

impl Checker {
    fn new(mode: CalcMode, record: bool) -> Self {
        Checker { mode, metas: Vec::new(), rigid: BTreeSet::new(), scope: Vec::new(), record }
    }

    fn fresh_meta(&mut self) -> Type {
        let allowed = self.scope.iter().cloned().collect();
        self.metas.push(MetaVar { solution: None, allowed });
        Type::Meta((self.metas.len() - 1) as u32)
    }

    fn fresh_rigid(&mut self, base: &str) -> Name {
        let n = fresh_name(base, &self.rigid);
        self.rigid.insert(n.clone());
        n
    }

    fn resolve(&self, t: &Type) -> Type {
        let mut cur = t.clone();
        while let Type::Meta(m) = cur {
            match &self.metas[m as usize].solution {
                Some(s) => cur = s.clone(),
                None => break,
            }
        }
        cur
    }

    fn zonk(&self, t: &Type) -> Type {
        match t {
            Type::Meta(m) => match &self.metas[*m as usize].solution {
                Some(s) => self.zonk(s),
                None => t.clone(),
            },
            Type::Var(_) => t.clone(),
            Type::Arrow(a, b) => Type::Arrow(Arc::new(self.zonk(a)), Arc::new(self.zonk(b))),
            Type::Forall(a, s) => Type::Forall(a.clone(), Arc::new(self.zonk(s))),
            Type::ArrowD(a, b, c, d) => Type::ArrowD(
                Arc::new(self.zonk(a)),
                Arc::new(self.zonk(b)),
                Arc::new(self.zonk(c)),
                Arc::new(self.zonk(d)),
            ),
            Type::ForallD(a, s, t, u) => {
                Type::ForallD(a.clone(), Arc::new(self.zonk(s)), Arc::new(self.zonk(t)), Arc::new(self.zonk(u)))
            }
            Type::Comp(s, t, u) => Type::Comp(Arc::new(self.zonk(s)), Arc::new(self.zonk(t)), Arc::new(self.zonk(u))),
        }
    }

    fn metas_of(&self, t: &Type, out: &mut Vec<u32>) {
        match self.zonk(t) {
            Type::Meta(m) => out.push(m),
            z => for_each_child(&z, |c| self.metas_of(c, out)),
        }
    }

    /// Forbid the unsolved metavariables of `t` from ever mentioning `a`.
    fn ban(&mut self, a: &Name, t: &Type) {
        let mut ms = Vec::new();
        self.metas_of(t, &mut ms);
        for m in ms {
            self.metas[m as usize].allowed.remove(a);
        }
    }

    /// `S[V/a]` on a type that may contain metavariables.
    fn instantiate(&mut self, s: &Type, a: &Name, v: &Type) -> Type {
        let z = self.zonk(s);
        self.ban(a, &z);
        subst_type(&z, a, v)
    }

    fn unify(&mut self, a: &Type, b: &Type) -> Result<(), TypeError> {
        self.unify_inner(a, b).map_err(|e| {
            if e.kind == TypeErrorKind::Mismatch {
                TypeError::mismatch(&self.zonk(a), &self.zonk(b))
            } else {
                e
            }
        })
    }

    fn unify_inner(&mut self, a: &Type, b: &Type) -> Result<(), TypeError> {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (Type::Meta(m), Type::Meta(n)) if m == n => Ok(()),
            (Type::Meta(m), _) => self.bind(*m, &b),
            (_, Type::Meta(n)) => self.bind(*n, &a),
            (Type::Var(x), Type::Var(y)) if x == y => Ok(()),
            (Type::ArrowD(a1, a2, a3, a4), Type::ArrowD(b1, b2, b3, b4)) => {
                self.unify_inner(a1, b1)?;
                self.unify_inner(a2, b2)?;
                self.unify_inner(a3, b3)?;
                self.unify_inner(a4, b4)
            }
            (Type::Comp(a1, a2, a3), Type::Comp(b1, b2, b3)) => {
                self.unify_inner(a1, b1)?;
                self.unify_inner(a2, b2)?;
                self.unify_inner(a3, b3)
            }
            (Type::ForallD(x, ..), Type::ForallD(y, ..)) => {
                let (za, zb) = (self.zonk(&a), self.zonk(&b));
                let (Type::ForallD(_, s1, t1, u1), Type::ForallD(_, s2, t2, u2)) = (&za, &zb) else { unreachable!() };
                let parts1 = [&**s1, &**t1, &**u1];
                let parts2 = [&**s2, &**t2, &**u2];
                let (p1, p2): (Vec<Type>, Vec<Type>) = if x == y {
                    (parts1.iter().map(|p| (*p).clone()).collect(), parts2.iter().map(|p| (*p).clone()).collect())
                } else if !zb.has_meta() && !zb.ftv().contains(x) {
                    let xv = Type::Var(x.clone());
                    (parts1.iter().map(|p| (*p).clone()).collect(), parts2.iter().map(|p| subst_type(p, y, &xv)).collect())
                } else if !za.has_meta() && !za.ftv().contains(y) {
                    let yv = Type::Var(y.clone());
                    (parts1.iter().map(|p| subst_type(p, x, &yv)).collect(), parts2.iter().map(|p| (*p).clone()).collect())
                } else {
                    let c = self.fresh_rigid(x.base());
                    let cv = Type::Var(c);
                    let p1 = parts1.iter().map(|p| self.instantiate(p, x, &cv)).collect();
                    let p2 = parts2.iter().map(|p| self.instantiate(p, y, &cv)).collect();
                    (p1, p2)
                };
                for (l, r) in p1.iter().zip(&p2) {
                    self.unify_inner(l, r)?;
                }
                Ok(())
            }
            _ => Err(TypeError::mismatch(&self.zonk(&a), &self.zonk(&b))),
        }
    }

    fn bind(&mut self, m: u32, t: &Type) -> Result<(), TypeError> {
        let t = self.zonk(t);
        if t == Type::Meta(m) {
            return Ok(());
        }
        let mut ms = Vec::new();
        self.metas_of(&t, &mut ms);
        if ms.contains(&m) {
            return Err(err(
                TypeErrorKind::OccursCheck,
                format!("?{m} occurs in `{}`", pretty_type(&t)),
            ));
        }
        let allowed = self.metas[m as usize].allowed.clone();
        self.check_scope(&t, &allowed, &mut Vec::new())?;
        self.metas[m as usize].solution = Some(t);
        Ok(())
    }

    /// Every rigid variable free in `t` must be allowed; metavariables inside
    /// `t` inherit the restriction (relaxed by binders around them).
    fn check_scope(&mut self, t: &Type, allowed: &BTreeSet<Name>, bound: &mut Vec<Name>) -> Result<(), TypeError> {
        match t {
            Type::Var(x) => {
                if !bound.contains(x) && self.rigid.contains(x) && !allowed.contains(x) {
                    return Err(err(
                        TypeErrorKind::FtvEscape,
                        format!("type variable `{x}` would escape its scope"),
                    ));
                }
                Ok(())
            }
            Type::Meta(n) => {
                let keep: BTreeSet<Name> = self.metas[*n as usize]
                    .allowed
                    .iter()
                    .filter(|v| allowed.contains(*v) || bound.contains(*v))
                    .cloned()
                    .collect();
                self.metas[*n as usize].allowed = keep;
                Ok(())
            }
            Type::Forall(a, body) => {
                bound.push(a.clone());
                let r = self.check_scope(body, allowed, bound);
                bound.pop();
                r
            }
            Type::ForallD(a, s, t2, u) => {
                bound.push(a.clone());
                let r = self
                    .check_scope(s, allowed, bound)
                    .and_then(|_| self.check_scope(t2, allowed, bound))
                    .and_then(|_| self.check_scope(u, allowed, bound));
                bound.pop();
                r
            }
            Type::Arrow(a, b) => {
                self.check_scope(a, allowed, bound)?;
                self.check_scope(b, allowed, bound)
            }
            Type::ArrowD(a, b, c, d) => {
                for x in [a, b, c, d] {
                    self.check_scope(x, allowed, bound)?;
                }
                Ok(())
            }
            Type::Comp(a, b, c) => {
                for x in [a, b, c] {
                    self.check_scope(x, allowed, bound)?;
                }
                Ok(())
            }
        }
    }

    /// Components of an annotated arrow, refining a metavariable if needed.
    fn expect_arrow(&mut self, t: &Type) -> Result<(Type, Type, Type, Type), TypeError> {
        match self.resolve(t) {
            Type::ArrowD(s, r, u, v) => Ok(((*s).clone(), (*r).clone(), (*u).clone(), (*v).clone())),
            Type::Meta(m) => {
                let s = if self.mode.is_cbn() {
                    Type::comp(self.fresh_meta(), self.fresh_meta(), self.fresh_meta())
                } else {
                    self.fresh_meta()
                };
                let (r, u, v) = (self.fresh_meta(), self.fresh_meta(), self.fresh_meta());
                self.bind(m, &Type::arrow_d(s.clone(), r.clone(), u.clone(), v.clone()))?;
                Ok((s, r, u, v))
            }
            other => Err(err(
                TypeErrorKind::NotArrow,
                format!("`{}` is applied to an argument", pretty_type(&self.zonk(&other))),
            )),
        }
    }

    fn expect_forall(&mut self, t: &Type) -> Result<(Name, Type, Type, Type), TypeError> {
        match self.resolve(t) {
            Type::ForallD(a, s, r, u) => Ok((a, (*s).clone(), (*r).clone(), (*u).clone())),
            Type::Meta(m) => {
                let a = self.fresh_rigid("a");
                let (s, r, u) = (self.fresh_meta(), self.fresh_meta(), self.fresh_meta());
                self.bind(m, &Type::ForallD(a.clone(), Arc::new(s.clone()), Arc::new(r.clone()), Arc::new(u.clone())))?;
                Ok((a, s, r, u))
            }
            other => Err(err(
                TypeErrorKind::NotForall,
                format!("`{}` is applied to a type", pretty_type(&self.zonk(&other))),
            )),
        }
    }

    fn node(&self, rule: &'static str, t: &Term, j: &Judgment, children: Vec<Option<Derivation>>) -> Option<Derivation> {
        self.record.then(|| Derivation {
            rule,
            subject: Subject::Term(t.clone()),
            conclusion: Conclusion::Term(j.clone()),
            children: children.into_iter().flatten().collect(),
        })
    }

    fn term(&mut self, g: &mut TypeEnvG, d: &mut TypeEnvD, t: &Term) -> Result<Out, TypeError> {
        self.term_inner(g, d, t).map_err(|e| e.at(t))
    }

    fn term_inner(&mut self, g: &mut TypeEnvG, d: &mut TypeEnvD, t: &Term) -> Result<Out, TypeError> {
        let cbn = self.mode.is_cbn();
        match t {
            Term::Var(x) => {
                let ty = g
                    .lookup(x)
                    .cloned()
                    .ok_or_else(|| err(TypeErrorKind::UnboundVar, format!("unbound variable `{x}`")))?;
                let j = if cbn {
                    match ty {
                        Type::Comp(s, r, u) => Judgment { ty: (*s).clone(), ans_in: (*r).clone(), ans_out: (*u).clone() },
                        other => {
                            return Err(err(
                                TypeErrorKind::ModeViolation,
                                format!("variable `{x}` has non-computation type `{}`", pretty_type(&other)),
                            ))
                        }
                    }
                } else {
                    let m = self.fresh_meta();
                    Judgment { ty, ans_in: m.clone(), ans_out: m }
                };
                Ok((j.clone(), self.node("var", t, &j, vec![])))
            }
            Term::Lam(x, s, body) => {
                g.0.push((x.clone(), s.clone()));
                let r = self.term(g, d, body);
                g.0.pop();
                let (jb, db) = r?;
                let w = self.fresh_meta();
                let j = Judgment { ty: Type::arrow_d(s.clone(), jb.ty, jb.ans_in, jb.ans_out), ans_in: w.clone(), ans_out: w };
                Ok((j.clone(), self.node("lam", t, &j, vec![db])))
            }
            Term::App(f, a) => {
                let (jf, df) = self.term(g, d, f)?;
                let (s, r, u, w) = self.expect_arrow(&jf.ty).map_err(|e| e.at(f))?;
                let (ja, da) = self.term(g, d, a)?;
                let j = if cbn {
                    // t0 : ({S,T,U} -> V @ [W, X], X, Y), t1 : (S, T, U)  ⟹  (V, W, Y)
                    self.unify(&w, &jf.ans_in).map_err(|e| e.at(f))?;
                    let arg = Type::comp(ja.ty, ja.ans_in, ja.ans_out);
                    self.unify(&s, &arg).map_err(|e| e.at(a))?;
                    Judgment { ty: r, ans_in: u, ans_out: jf.ans_out }
                } else {
                    // t0 : (S -> T @ [U, W], X, V), t1 : (S, W, X)  ⟹  (T, U, V)
                    self.unify(&s, &ja.ty).map_err(|e| e.at(a))?;
                    self.unify(&w, &ja.ans_in).map_err(|e| e.at(a))?;
                    self.unify(&ja.ans_out, &jf.ans_in).map_err(|e| e.at(a))?;
                    Judgment { ty: r, ans_in: u, ans_out: jf.ans_out }
                };
                Ok((j.clone(), self.node("app", t, &j, vec![df, da])))
            }
            Term::TyLam(a, body) => {
                let escapes = g.0.iter().any(|(_, ty)| self.zonk(ty).ftv().contains(a))
                    || d.0.iter().any(|(_, c)| c.ftv().contains(a));
                if escapes {
                    return Err(err(
                        TypeErrorKind::FtvEscape,
                        format!("type variable `{a}` is free in the environment"),
                    ));
                }
                let a2 = self.fresh_rigid(a.as_str());
                let body2 = subst_type_in_term(body, a, &Type::Var(a2.clone()));
                self.scope.push(a2.clone());
                let r = self.term(g, d, &body2);
                self.scope.pop();
                let (jb, db) = r?;
                let v = self.fresh_meta();
                let ty = Type::ForallD(a2, Arc::new(jb.ty), Arc::new(jb.ans_in), Arc::new(jb.ans_out));
                let j = Judgment { ty, ans_in: v.clone(), ans_out: v };
                Ok((j.clone(), self.node("tylam", t, &j, vec![db])))
            }
            Term::TyApp(f, v) => {
                // t : (forall a. S @ [T, U], U[V/a], W)  ⟹  (S[V/a], T[V/a], W)
                let (jf, df) = self.term(g, d, f)?;
                let (a, s, r, u) = self.expect_forall(&jf.ty).map_err(|e| e.at(f))?;
                let s = self.instantiate(&s, &a, v);
                let r = self.instantiate(&r, &a, v);
                let u = self.instantiate(&u, &a, v);
                self.unify(&jf.ans_in, &u)?;
                let j = Judgment { ty: s, ans_in: r, ans_out: jf.ans_out };
                Ok((j.clone(), self.node("tyapp", t, &j, vec![df])))
            }
            Term::Reset(body) => {
                // t : (U, U, S)  ⟹  (S, T, T)
                let (jb, db) = self.term(g, d, body)?;
                self.unify(&jb.ty, &jb.ans_in)?;
                let m = self.fresh_meta();
                let j = Judgment { ty: jb.ans_out, ans_in: m.clone(), ans_out: m };
                Ok((j.clone(), self.node("reset", t, &j, vec![db])))
            }
            Term::Shift(k, c, body) => {
                // Δ, k : (S, T) cont ⊢ t : (V, V, U)  ⟹  (S, T, U)
                let ContType::Delim(s, r) = c else {
                    return Err(err(TypeErrorKind::ModeViolation, "shift binder needs an `(S, T) cont` annotation"));
                };
                d.0.push((k.clone(), c.clone()));
                let res = self.term(g, d, body);
                d.0.pop();
                let (jb, db) = res?;
                self.unify(&jb.ty, &jb.ans_in)?;
                let j = Judgment { ty: s.clone(), ans_in: r.clone(), ans_out: jb.ans_out };
                Ok((j.clone(), self.node("shift", t, &j, vec![db])))
            }
            Term::Throw(k, _, body) => {
                let (s, r) = match d.lookup(k) {
                    Some(ContType::Delim(s, r)) => (s.clone(), r.clone()),
                    Some(_) => return Err(err(TypeErrorKind::ModeViolation, format!("`{k}` has an abortive type"))),
                    None => {
                        return Err(err(TypeErrorKind::UnboundVar, format!("unbound continuation variable `{k}`")))
                    }
                };
                let (jb, db) = self.term(g, d, body)?;
                let j = self.throw_rule(&s, &r, &jb).map_err(|e| e.at(body))?;
                Ok((j.clone(), self.node("throw", t, &j, vec![db])))
            }
            Term::ThrowCtx(e, _, body) => {
                let (jb, db) = self.term(g, d, body)?;
                // Reified contexts are closed: `⊢ E : (S, T) cont` has no environment.
                let (answer, de) = self.context(&mut TypeEnvG::default(), &mut TypeEnvD::default(), e, &jb.ty)?;
                let hole = jb.ty.clone();
                let j = self.throw_rule(&hole, &answer, &jb)?;
                Ok((j.clone(), self.node("throw-ctx", t, &j, vec![de, db])))
            }
            Term::Callcc(..) => Err(err(TypeErrorKind::ModeViolation, "callcc in the delimited calculus")),
        }
    }

    /// Throw to a context of type `(S, T) cont` with the thrown term judged `jb`.
    fn throw_rule(&mut self, s: &Type, r: &Type, jb: &Judgment) -> Result<Judgment, TypeError> {
        self.unify(s, &jb.ty)?;
        if self.mode.is_cbn() {
            // t : (S, T, W)  ⟹  (W, X, X)
            self.unify(r, &jb.ans_in)?;
            let m = self.fresh_meta();
            Ok(Judgment { ty: jb.ans_out.clone(), ans_in: m.clone(), ans_out: m })
        } else {
            // t : (S, U, V)  ⟹  (T, U, V)
            Ok(Judgment { ty: r.clone(), ans_in: jb.ans_in.clone(), ans_out: jb.ans_out.clone() })
        }
    }

    /// `⊢ E : (hole, A) cont`; returns `A`.
    fn context(&mut self, g: &mut TypeEnvG, d: &mut TypeEnvD, e: &EvalContext, hole: &Type) -> Result<(Type, Option<Derivation>), TypeError> {
        let frames: Vec<&Frame> = e.frames_inner_first().collect();
        self.frames(g, d, &frames, hole)
    }

    fn frames(&mut self, g: &mut TypeEnvG, d: &mut TypeEnvD, frames: &[&Frame], hole: &Type) -> Result<(Type, Option<Derivation>), TypeError> {
        let ctx_node = |ck: &Checker, rule, hole: &Type, ans: &Type, children: Vec<Option<Derivation>>| {
            ck.record.then(|| Derivation {
                rule,
                subject: Subject::Context(EvalContext::from_inner_first(frames.iter().map(|f| (*f).clone()).collect())),
                conclusion: Conclusion::Context(hole.clone(), ans.clone()),
                children: children.into_iter().flatten().collect(),
            })
        };
        let Some((inner, outer)) = frames.split_first() else {
            return Ok((hole.clone(), ctx_node(self, "hole", hole, hole, vec![])));
        };
        let cbn = self.mode.is_cbn();
        match inner {
            Frame::Fun { param, ann, body } => {
                // λ : S -> T @ [U, V],  E : (T, U)  ⟹  (S, V)
                let lam = Term::Lam(param.clone(), ann.clone(), body.clone());
                let (jl, dl) = self.term(g, d, &lam)?;
                let (s, r, u, v) = self.expect_arrow(&jl.ty)?;
                self.unify(hole, &s)?;
                let (a, de) = self.frames(g, d, outer, &r)?;
                self.unify(&a, &u)?;
                Ok((v.clone(), ctx_node(self, "ctx-fun", hole, &v, vec![dl, de])))
            }
            Frame::Arg(t) => {
                let (s, r, u, v) = self.expect_arrow(hole)?;
                let (jt, dt) = self.term(g, d, t)?;
                let ans = if cbn {
                    // t : (S, T, U),  E : (V, W)  ⟹  ({S,T,U} -> V @ [W, X], X)
                    self.unify(&s, &Type::comp(jt.ty, jt.ans_in, jt.ans_out)).map_err(|e| e.at(t))?;
                    let (a, de) = self.frames(g, d, outer, &r)?;
                    self.unify(&a, &u)?;
                    (v, de)
                } else {
                    // t : (S, V, W),  E : (T, U)  ⟹  (S -> T @ [U, V], W)
                    self.unify(&s, &jt.ty).map_err(|e| e.at(t))?;
                    self.unify(&v, &jt.ans_in).map_err(|e| e.at(t))?;
                    let (a, de) = self.frames(g, d, outer, &r)?;
                    self.unify(&a, &u)?;
                    (jt.ans_out, de)
                };
                Ok((ans.0.clone(), ctx_node(self, "ctx-arg", hole, &ans.0, vec![dt, ans.1])))
            }
            Frame::TyArg(v) => {
                // E : (S[V/a], T[V/a])  ⟹  (forall a. S @ [T, U], U[V/a])
                let (a, s, r, u) = self.expect_forall(hole)?;
                let s = self.instantiate(&s, &a, v);
                let r = self.instantiate(&r, &a, v);
                let u = self.instantiate(&u, &a, v);
                let (ans, de) = self.frames(g, d, outer, &s)?;
                self.unify(&ans, &r)?;
                Ok((u.clone(), ctx_node(self, "ctx-tyarg", hole, &u, vec![de])))
            }
            Frame::Throw(e0, _) => {
                // E' : (S, T),  E : (T, U)  ⟹  (S, U)
                let (t, d0) = self.context(g, d, e0, hole)?;
                let (ans, de) = self.frames(g, d, outer, &t)?;
                Ok((ans.clone(), ctx_node(self, "ctx-throw", hole, &ans, vec![d0, de])))
            }
        }
    }

    fn judgment(&self, j: &Judgment) -> Judgment {
        j.map(|t| self.zonk(t))
    }

    fn zonk_derivation(&self, d: Option<Derivation>) -> Option<Derivation> {
        d.map(|d| d.map_types(&mut |t| self.zonk(t)))
    }
}

fn for_each_child(t: &Type, mut f: impl FnMut(&Type)) {
    match t {
        Type::Var(_) | Type::Meta(_) => {}
        Type::Arrow(a, b) => {
            f(a);
            f(b);
        }
        Type::Forall(_, s) => f(s),
        Type::ArrowD(a, b, c, d) => {
            for x in [a, b, c, d] {
                f(x);
            }
        }
        Type::ForallD(_, a, b, c) | Type::Comp(a, b, c) => {
            for x in [a, b, c] {
                f(x);
            }
        }
    }
}

/// Renumber metavariables by first appearance and give renamed binders
/// their source names back where that captures nothing.
pub fn tidy(types: &[Type]) -> Vec<Type> {
    let mut numbering = BTreeMap::new();
    let mut out = Vec::with_capacity(types.len());
    for t in types {
        out.push(tidy_type(t, &mut numbering));
    }
    out
}

fn tidy_type(t: &Type, numbering: &mut BTreeMap<u32, u32>) -> Type {
    match t {
        Type::Meta(m) => {
            let next = numbering.len() as u32;
            Type::Meta(*numbering.entry(*m).or_insert(next))
        }
        Type::Var(_) => t.clone(),
        Type::Arrow(a, b) => Type::Arrow(Arc::new(tidy_type(a, numbering)), Arc::new(tidy_type(b, numbering))),
        Type::Forall(a, s) => {
            let (a, s) = tidy_binder(a, &[&**s]);
            Type::Forall(a, Arc::new(tidy_type(&s[0], numbering)))
        }
        Type::ArrowD(a, b, c, d) => Type::ArrowD(
            Arc::new(tidy_type(a, numbering)),
            Arc::new(tidy_type(b, numbering)),
            Arc::new(tidy_type(c, numbering)),
            Arc::new(tidy_type(d, numbering)),
        ),
        Type::ForallD(a, s, r, u) => {
            let (a, p) = tidy_binder(a, &[&**s, &**r, &**u]);
            Type::ForallD(
                a,
                Arc::new(tidy_type(&p[0], numbering)),
                Arc::new(tidy_type(&p[1], numbering)),
                Arc::new(tidy_type(&p[2], numbering)),
            )
        }
        Type::Comp(a, b, c) => Type::Comp(
            Arc::new(tidy_type(a, numbering)),
            Arc::new(tidy_type(b, numbering)),
            Arc::new(tidy_type(c, numbering)),
        ),
    }
}

fn tidy_binder(a: &Name, parts: &[&Type]) -> (Name, Vec<Type>) {
    let base = Name::new(a.base());
    let clash = parts.iter().any(|p| {
        let f = p.ftv();
        f.contains(&base) && base != *a
    });
    if base == *a || clash {
        return (a.clone(), parts.iter().map(|p| (*p).clone()).collect());
    }
    let bv = Type::Var(base.clone());
    (base, parts.iter().map(|p| subst_type(p, a, &bv)).collect())
}

fn prepare(t: &Term, mode: CalcMode) -> Result<(), TypeError> {
    if !mode.is_delimited() {
        return Err(err(TypeErrorKind::ModeViolation, "delimited checker used in abortive mode"));
    }
    validate(t, mode).map_err(|e| TypeError::from(e).at(t))
}

fn tidy_judgment(j: &Judgment) -> Judgment {
    let v = tidy(&[j.ty.clone(), j.ans_in.clone(), j.ans_out.clone()]);
    Judgment { ty: v[0].clone(), ans_in: v[1].clone(), ans_out: v[2].clone() }
}

/// Most general judgment of `t`, with metavariables numbered from `?0`.
pub fn infer_term_delim(g: &TypeEnvG, d: &TypeEnvD, t: &Term, mode: CalcMode) -> Result<Judgment, TypeError> {
    prepare(t, mode)?;
    let mut ck = Checker::new(mode, false);
    let (j, _) = ck.term(&mut g.clone(), &mut d.clone(), t)?;
    Ok(tidy_judgment(&ck.judgment(&j)))
}

/// As [`infer_term_delim`], also returning the derivation. Types in both are
/// fully resolved but neither renumbered nor tidied, so the derivation's
/// subjects (with renamed type binders) match its types.
pub fn infer_with_derivation(g: &TypeEnvG, d: &TypeEnvD, t: &Term, mode: CalcMode) -> Result<(Judgment, Derivation), TypeError> {
    prepare(t, mode)?;
    let mut ck = Checker::new(mode, true);
    let (j, der) = ck.term(&mut g.clone(), &mut d.clone(), t)?;
    let der = ck.zonk_derivation(der).expect("recording was enabled");
    Ok((ck.judgment(&j), der))
}

/// `⊢ E : (S, T) cont` for the hole type `requested` (a fresh metavariable if absent).
pub fn infer_context_delim(
    g: &TypeEnvG,
    d: &TypeEnvD,
    e: &EvalContext,
    requested: Option<&Type>,
    mode: CalcMode,
) -> Result<ContType, TypeError> {
    validate_context(e, mode)?;
    let mut ck = Checker::new(mode, false);
    let hole = match requested {
        Some(t) => {
            validate_type(t, mode)?;
            t.clone()
        }
        None => ck.fresh_meta(),
    };
    let (ans, _) = ck.context(&mut g.clone(), &mut d.clone(), e, &hole)?;
    let v = tidy(&[ck.zonk(&hole), ck.zonk(&ans)]);
    Ok(ContType::Delim(v[0].clone(), v[1].clone()))
}

/// `⊢ F : not S`, for the hole type `requested` (a fresh metavariable if absent).
pub fn infer_metacontext(
    g: &TypeEnvG,
    d: &TypeEnvD,
    f: &Metacontext,
    requested: Option<&Type>,
    mode: CalcMode,
) -> Result<MetaType, TypeError> {
    let mut ck = Checker::new(mode, false);
    let hole = match requested {
        Some(t) => t.clone(),
        None => ck.fresh_meta(),
    };
    let (mut g, mut d) = (g.clone(), d.clone());
    let mut cur = hole.clone();
    for e in f.top_first() {
        validate_context(e, mode)?;
        cur = ck.context(&mut g, &mut d, e, &cur)?.0;
    }
    Ok(MetaType(tidy(&[ck.zonk(&hole)])[0].clone()))
}

/// A closed plain program `⟨t⟩` and its type.
pub fn check_program_delim(t: &Term, mode: CalcMode) -> Result<Type, TypeError> {
    prepare(t, mode)?;
    if !matches!(t, Term::Reset(_)) {
        return Err(err(TypeErrorKind::NotResetWrapped, "delimited programs have the form `reset t`").at(t));
    }
    check_closed_plain(t)?;
    let j = infer_term_delim(&TypeEnvG::default(), &TypeEnvD::default(), t, mode)?;
    Ok(j.ty)
}

/// Re-check an intermediate program (reified contexts allowed) against the
/// type `expected` of the program it came from. Metavariables in `expected`
/// are treated as rigid: the program must be at least as general.
pub fn check_preserved(t: &Term, expected: &Type, mode: CalcMode) -> Result<(), TypeError> {
    prepare(t, mode)?;
    if !matches!(t, Term::Reset(_)) {
        return Err(err(TypeErrorKind::NotResetWrapped, "delimited programs have the form `reset t`").at(t));
    }
    let mut ck = Checker::new(mode, false);
    let (j, _) = ck.term(&mut TypeEnvG::default(), &mut TypeEnvD::default(), t)?;
    let skolem = skolemize(expected);
    ck.unify(&skolem, &j.ty).map_err(|e| e.at(t))
}

/// Replace each metavariable `?n` by a rigid type variable `?n` cannot clash with.
fn skolemize(t: &Type) -> Type {
    match t {
        Type::Meta(m) => Type::Var(Name::new(&format!("_sk{m}"))),
        Type::Var(_) => t.clone(),
        Type::Arrow(a, b) => Type::arrow(skolemize(a), skolemize(b)),
        Type::Forall(a, s) => Type::Forall(a.clone(), Arc::new(skolemize(s))),
        Type::ArrowD(a, b, c, d) => Type::arrow_d(skolemize(a), skolemize(b), skolemize(c), skolemize(d)),
        Type::ForallD(a, s, r, u) => {
            Type::ForallD(a.clone(), Arc::new(skolemize(s)), Arc::new(skolemize(r)), Arc::new(skolemize(u)))
        }
        Type::Comp(a, b, c) => Type::comp(skolemize(a), skolemize(b), skolemize(c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::alpha_eq_type;

    const V: CalcMode = CalcMode::DELIMITED_CBV;
    const N: CalcMode = CalcMode::DELIMITED_CBN;

    fn a() -> Type {
        Type::var("a")
    }

    /// forall a. (a -> a @ [a, a]) @ [a, a]
    fn ud() -> Type {
        Type::forall_d("a", Type::arrow_d(a(), a(), a(), a()), a(), a())
    }

    fn id_ud() -> Term {
        Term::ty_lam("a", Term::lam("x", a(), Term::var("x")))
    }

    fn empty() -> (TypeEnvG, TypeEnvD) {
        (TypeEnvG::default(), TypeEnvD::default())
    }

    #[test]
    fn abstraction_is_pure() {
        let (g, d) = empty();
        let j = infer_term_delim(&g, &d, &Term::lam("x", ud(), Term::var("x")), V).unwrap();
        // The var rule ties the body's answer types together.
        assert_eq!(j.ty, Type::arrow_d(ud(), ud(), Type::Meta(0), Type::Meta(0)));
        assert_eq!(j.ans_in, Type::Meta(1));
        assert_eq!(j.ans_out, Type::Meta(1));
    }

    #[test]
    fn identity_instantiates_to_ud() {
        let (g, d) = empty();
        let j = infer_term_delim(&g, &d, &id_ud(), V).unwrap();
        match &j.ty {
            Type::ForallD(_, s, t, u) => {
                assert!(matches!(**s, Type::ArrowD(..)));
                assert!(t.has_meta() && u.has_meta());
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(j.ans_in, j.ans_out);
        // The program ⟨idU_d [U_d]⟩ forces nothing, but checks.
        let p = Term::reset(Term::app(Term::ty_app(id_ud(), ud()), id_ud()));
        let ty = check_program_delim(&p, V).unwrap();
        assert!(matches!(ty, Type::ForallD(..)));
    }

    #[test]
    fn reset_shift_discarding() {
        let p = Term::reset(Term::shift("k", ContType::Delim(ud(), ud()), id_ud()));
        let (g, d) = empty();
        let j = infer_term_delim(&g, &d, &p, V).unwrap();
        assert!(matches!(j.ty, Type::ForallD(..)));
        assert_eq!(j.ans_in, j.ans_out);
    }

    #[test]
    fn throw_to_variable() {
        let (g, mut d) = empty();
        d.0.push((Name::new("k"), ContType::Delim(ud(), ud())));
        let j = infer_term_delim(&g, &d, &Term::throw("k", None, id_ud()), V).unwrap();
        assert!(alpha_eq_type(&j.ty, &ud()));
        assert_eq!(j.ans_in, j.ans_out);
    }

    #[test]
    fn shift_throw_program() {
        let p = Term::reset(Term::shift("k", ContType::Delim(ud(), ud()), Term::throw("k", None, id_ud())));
        let ty = check_program_delim(&p, V).unwrap();
        assert!(alpha_eq_type(&ty, &ud()));
    }

    #[test]
    fn program_shape() {
        assert_eq!(check_program_delim(&id_ud(), V).unwrap_err().kind, TypeErrorKind::NotResetWrapped);
        let t = Term::reset(Term::throw_ctx(EvalContext::hole(), None, id_ud()));
        assert_eq!(check_program_delim(&t, V).unwrap_err().kind, TypeErrorKind::NotPlain);
        let expected = check_program_delim(&Term::reset(id_ud()), V).unwrap();
        assert!(check_preserved(&t, &expected, V).is_ok());
        assert_eq!(check_preserved(&t, &Type::Meta(0), V).unwrap_err().kind, TypeErrorKind::Mismatch);
    }

    #[test]
    fn contexts() {
        let (g, d) = empty();
        assert_eq!(
            infer_context_delim(&g, &d, &EvalContext::hole(), Some(&ud()), V).unwrap(),
            ContType::Delim(ud(), ud())
        );
        let fun = Frame::Fun { param: Name::new("x"), ann: ud(), body: Box::new(Term::var("x")) };
        let c = infer_context_delim(&g, &d, &EvalContext::hole().with_inner(fun), None, V).unwrap();
        match c {
            ContType::Delim(s, t) => {
                assert_eq!(s, ud());
                // The body's answer types are tied to the outer hole's.
                assert!(alpha_eq_type(&t, &ud()));
            }
            other => panic!("{other:?}"),
        }
        let thr = EvalContext::hole().with_inner(Frame::Throw(EvalContext::hole(), None));
        let c = infer_context_delim(&g, &d, &thr, Some(&ud()), V).unwrap();
        assert_eq!(c, ContType::Delim(ud(), ud()));
    }

    #[test]
    fn metacontexts() {
        let (g, d) = empty();
        assert_eq!(infer_metacontext(&g, &d, &Metacontext::empty(), Some(&ud()), V).unwrap(), MetaType(ud()));
        let f = Metacontext::from_top_first(vec![EvalContext::hole()]);
        assert_eq!(infer_metacontext(&g, &d, &f, Some(&ud()), V).unwrap(), MetaType(ud()));
        // A context that needs a function in its hole, given a universal type.
        let bad = Metacontext::from_top_first(vec![EvalContext::hole().with_inner(Frame::Arg(id_ud()))]);
        assert_eq!(infer_metacontext(&g, &d, &bad, Some(&ud()), V).unwrap_err().kind, TypeErrorKind::NotArrow);
    }

    #[test]
    fn mismatch_and_escape() {
        let (g, d) = empty();
        let bad = Term::app(Term::lam("x", a(), Term::var("x")), id_ud());
        assert_eq!(infer_term_delim(&g, &d, &bad, V).unwrap_err().kind, TypeErrorKind::Mismatch);
        let esc = Term::lam("x", a(), Term::ty_lam("a", Term::var("x")));
        assert_eq!(infer_term_delim(&g, &d, &esc, V).unwrap_err().kind, TypeErrorKind::FtvEscape);
        assert_eq!(
            infer_term_delim(&g, &d, &Term::app(id_ud(), id_ud()), V).unwrap_err().kind,
            TypeErrorKind::NotArrow
        );
    }

    #[test]
    fn cbn_application() {
        // (fun (x:{a,b,b}) -> x) applied to a variable of the same triple type.
        let triple = Type::comp(a(), Type::var("b"), Type::var("b"));
        let (mut g, d) = empty();
        g.0.push((Name::new("y"), triple.clone()));
        let t = Term::app(Term::lam("x", triple, Term::var("x")), Term::var("y"));
        let j = infer_term_delim(&g, &d, &t, N).unwrap();
        assert_eq!(j.ty, a());
        assert_eq!(j.ans_in, Type::var("b"));
        assert_eq!(j.ans_out, Type::var("b"));
    }

    #[test]
    fn tidy_restores_names() {
        let (g, d) = empty();
        let j = infer_term_delim(&g, &d, &id_ud(), V).unwrap();
        let Type::ForallD(b, ..) = &j.ty else { panic!() };
        assert_eq!(b.as_str(), "a");
    }
}
