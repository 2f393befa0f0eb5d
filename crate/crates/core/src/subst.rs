//! Capture-avoiding substitution.
//!
//! Three kinds are supported by one traversal: a term for a term variable,
//! a type for a type variable, and a reified context (or another name) for a
//! continuation variable. Renaming a binder is itself a substitution of a
//! variable for a variable, so the same walk handles it.

use std::sync::Arc;
use std::collections::BTreeSet;

use crate::syntax::{fresh_name, ContType, EvalContext, Frame, FreeVars, Name, Term, Type};

/// What a continuation variable is replaced by.
#[derive(Clone, Debug)]
pub enum ContTarget {
    Var(Name),
    Ctx(EvalContext),
}

#[derive(Clone, Debug)]
enum Subst {
    Term(Name, Term),
    Type(Name, Type),
    Cont(Name, ContTarget),
}

struct Ctx {
    sub: Subst,
    /// Free variables of the replacement; binders in this set get renamed.
    fv: FreeVars,
}

impl Ctx {
    fn new(sub: Subst) -> Self {
        let fv = match &sub {
            Subst::Term(_, t) => t.free_vars(),
            Subst::Type(_, ty) => FreeVars { types: ty.ftv(), ..FreeVars::default() },
            Subst::Cont(_, ContTarget::Var(k)) => {
                FreeVars { conts: BTreeSet::from([k.clone()]), ..FreeVars::default() }
            }
            Subst::Cont(_, ContTarget::Ctx(e)) => e.free_vars(),
        };
        Ctx { sub, fv }
    }
}

/// `t[v/x]`.
pub fn subst_term(t: &Term, x: &Name, v: &Term) -> Term {
    go_term(t, &Ctx::new(Subst::Term(x.clone(), v.clone())))
}

/// Rename every type abstraction's binder to a fresh name, including those
/// inside reified contexts. The result is alpha-equivalent to `t`, and no
/// binder shadows a type variable that is free at that point.
pub fn rename_type_binders(t: &Term) -> Term {
    let b = |x: &Term| Box::new(rename_type_binders(x));
    match t {
        Term::Var(_) => t.clone(),
        Term::Lam(x, ann, body) => Term::Lam(x.clone(), ann.clone(), b(body)),
        Term::App(f, a) => Term::App(b(f), b(a)),
        Term::TyLam(a, body) => {
            let fresh = fresh_name(a.as_str(), &body.free_vars().types);
            let body = subst_type_in_term(body, a, &Type::Var(fresh.clone()));
            Term::TyLam(fresh, b(&body))
        }
        Term::TyApp(f, ty) => Term::TyApp(b(f), ty.clone()),
        Term::Callcc(k, c, body) => Term::Callcc(k.clone(), c.clone(), b(body)),
        Term::Shift(k, c, body) => Term::Shift(k.clone(), c.clone(), b(body)),
        Term::Reset(body) => Term::Reset(b(body)),
        Term::Throw(k, ann, body) => Term::Throw(k.clone(), ann.clone(), b(body)),
        Term::ThrowCtx(e, ann, body) => Term::ThrowCtx(rename_in_context(e), ann.clone(), b(body)),
    }
}

fn rename_in_context(e: &EvalContext) -> EvalContext {
    e.map_frames(|f| match f {
        Frame::Fun { param, ann, body } => {
            Frame::Fun { param: param.clone(), ann: ann.clone(), body: Box::new(rename_type_binders(body)) }
        }
        Frame::Arg(a) => Frame::Arg(rename_type_binders(a)),
        Frame::TyArg(ty) => Frame::TyArg(ty.clone()),
        Frame::Throw(e0, ann) => Frame::Throw(rename_in_context(e0), ann.clone()),
    })
}

/// `t[V/a]`, substituting inside every annotation of `t`.
pub fn subst_type_in_term(t: &Term, a: &Name, ty: &Type) -> Term {
    go_term(t, &Ctx::new(Subst::Type(a.clone(), ty.clone())))
}

/// `t[↑E/k]`: every `throw k s` becomes a throw to the reified context `E`.
pub fn subst_cont(t: &Term, k: &Name, e: &EvalContext) -> Term {
    go_term(t, &Ctx::new(Subst::Cont(k.clone(), ContTarget::Ctx(e.clone()))))
}

/// `S[V/a]`.
pub fn subst_type(s: &Type, a: &Name, v: &Type) -> Type {
    let avoid = v.ftv();
    go_type(s, a, v, &avoid)
}

pub fn subst_cont_type(c: &ContType, a: &Name, v: &Type) -> ContType {
    match c {
        ContType::Abort(s) => ContType::Abort(subst_type(s, a, v)),
        ContType::Delim(s, t) => ContType::Delim(subst_type(s, a, v), subst_type(t, a, v)),
    }
}

/// Substitute a type inside the annotations of an evaluation context.
pub fn subst_type_in_context(e: &EvalContext, a: &Name, ty: &Type) -> EvalContext {
    go_ctx(e, &Ctx::new(Subst::Type(a.clone(), ty.clone())))
}

fn go_type(s: &Type, a: &Name, v: &Type, avoid: &BTreeSet<Name>) -> Type {
    match s {
        Type::Var(b) => {
            if b == a {
                v.clone()
            } else {
                s.clone()
            }
        }
        Type::Meta(_) => s.clone(),
        Type::Arrow(x, y) => Type::Arrow(Arc::new(go_type(x, a, v, avoid)), Arc::new(go_type(y, a, v, avoid))),
        Type::ArrowD(x, y, z, w) => Type::ArrowD(
            Arc::new(go_type(x, a, v, avoid)),
            Arc::new(go_type(y, a, v, avoid)),
            Arc::new(go_type(z, a, v, avoid)),
            Arc::new(go_type(w, a, v, avoid)),
        ),
        Type::Comp(x, y, z) => Type::Comp(
            Arc::new(go_type(x, a, v, avoid)),
            Arc::new(go_type(y, a, v, avoid)),
            Arc::new(go_type(z, a, v, avoid)),
        ),
        Type::Forall(b, body) => {
            if b == a {
                return s.clone();
            }
            let (b, body) = freshen_type_binder(b, &[body], avoid);
            Type::Forall(b, Arc::new(go_type(&body[0], a, v, avoid)))
        }
        Type::ForallD(b, x, y, z) => {
            if b == a {
                return s.clone();
            }
            let (b, parts) = freshen_type_binder(b, &[x, y, z], avoid);
            Type::ForallD(
                b,
                Arc::new(go_type(&parts[0], a, v, avoid)),
                Arc::new(go_type(&parts[1], a, v, avoid)),
                Arc::new(go_type(&parts[2], a, v, avoid)),
            )
        }
    }
}

/// Rename a type binder away from `avoid` if it would capture.
fn freshen_type_binder(b: &Name, parts: &[&Type], avoid: &BTreeSet<Name>) -> (Name, Vec<Type>) {
    if !avoid.contains(b) {
        return (b.clone(), parts.iter().map(|p| (*p).clone()).collect());
    }
    let mut used = avoid.clone();
    for p in parts {
        used.extend(p.ftv());
    }
    let nb = fresh_name(b.as_str(), &used);
    let nv = Type::Var(nb.clone());
    let renamed = parts.iter().map(|p| subst_type(p, b, &nv)).collect();
    (nb, renamed)
}

fn sub_ty(ty: &Type, c: &Ctx) -> Type {
    match &c.sub {
        Subst::Type(a, v) => go_type(ty, a, v, &c.fv.types),
        _ => ty.clone(),
    }
}

fn sub_cont_ty(ct: &ContType, c: &Ctx) -> ContType {
    match ct {
        ContType::Abort(s) => ContType::Abort(sub_ty(s, c)),
        ContType::Delim(s, t) => ContType::Delim(sub_ty(s, c), sub_ty(t, c)),
    }
}

fn sub_ann(ann: &Option<Type>, c: &Ctx) -> Option<Type> {
    ann.as_ref().map(|t| sub_ty(t, c))
}

/// Term binder: stop if it shadows, rename if it would capture.
fn term_binder(x: &Name, body: &Term, c: &Ctx) -> Option<(Name, Term)> {
    if let Subst::Term(y, _) = &c.sub {
        if y == x {
            return None;
        }
    }
    if c.fv.terms.contains(x) {
        let mut used = c.fv.all();
        used.extend(body.free_vars().all());
        let nx = fresh_name(x.as_str(), &used);
        let body = subst_term(body, x, &Term::Var(nx.clone()));
        Some((nx, body))
    } else {
        Some((x.clone(), body.clone()))
    }
}

fn go_term(t: &Term, c: &Ctx) -> Term {
    match t {
        Term::Var(x) => match &c.sub {
            Subst::Term(y, v) if y == x => v.clone(),
            _ => t.clone(),
        },
        Term::Lam(x, ann, body) => {
            let ann = sub_ty(ann, c);
            match term_binder(x, body, c) {
                None => Term::Lam(x.clone(), ann, body.clone()),
                Some((x, body)) => Term::Lam(x, ann, Box::new(go_term(&body, c))),
            }
        }
        Term::App(f, a) => Term::App(Box::new(go_term(f, c)), Box::new(go_term(a, c))),
        Term::TyLam(a, body) => {
            if let Subst::Type(b, _) = &c.sub {
                if a == b {
                    return t.clone();
                }
            }
            if c.fv.types.contains(a) {
                let mut used = c.fv.all();
                used.extend(body.free_vars().all());
                let na = fresh_name(a.as_str(), &used);
                let body = subst_type_in_term(body, a, &Type::Var(na.clone()));
                Term::TyLam(na, Box::new(go_term(&body, c)))
            } else {
                Term::TyLam(a.clone(), Box::new(go_term(body, c)))
            }
        }
        Term::TyApp(b, ty) => Term::TyApp(Box::new(go_term(b, c)), sub_ty(ty, c)),
        Term::Callcc(k, ann, body) | Term::Shift(k, ann, body) => {
            let ann = sub_cont_ty(ann, c);
            let rebuild = |k: Name, body: Term| match t {
                Term::Callcc(..) => Term::Callcc(k, ann.clone(), Box::new(body)),
                _ => Term::Shift(k, ann.clone(), Box::new(body)),
            };
            if let Subst::Cont(j, _) = &c.sub {
                if j == k {
                    return rebuild(k.clone(), (**body).clone());
                }
            }
            if c.fv.conts.contains(k) {
                let mut used = c.fv.all();
                used.extend(body.free_vars().all());
                let nk = fresh_name(k.as_str(), &used);
                let body = go_term(body, &Ctx::new(Subst::Cont(k.clone(), ContTarget::Var(nk.clone()))));
                rebuild(nk, go_term(&body, c))
            } else {
                rebuild(k.clone(), go_term(body, c))
            }
        }
        Term::Reset(b) => Term::Reset(Box::new(go_term(b, c))),
        Term::Throw(k, ann, b) => {
            let ann = sub_ann(ann, c);
            let b = Box::new(go_term(b, c));
            match &c.sub {
                Subst::Cont(j, tgt) if j == k => match tgt {
                    ContTarget::Var(nk) => Term::Throw(nk.clone(), ann, b),
                    ContTarget::Ctx(e) => Term::ThrowCtx(e.clone(), ann, b),
                },
                _ => Term::Throw(k.clone(), ann, b),
            }
        }
        Term::ThrowCtx(e, ann, b) => Term::ThrowCtx(go_ctx(e, c), sub_ann(ann, c), Box::new(go_term(b, c))),
    }
}

fn go_ctx(e: &EvalContext, c: &Ctx) -> EvalContext {
    e.map_frames(|f| match f {
        Frame::Fun { param, ann, body } => {
            let ann = sub_ty(ann, c);
            match term_binder(param, body, c) {
                None => Frame::Fun { param: param.clone(), ann, body: body.clone() },
                Some((p, b)) => Frame::Fun { param: p, ann, body: Box::new(go_term(&b, c)) },
            }
        }
        Frame::Arg(a) => Frame::Arg(go_term(a, c)),
        Frame::TyArg(ty) => Frame::TyArg(sub_ty(ty, c)),
        Frame::Throw(e0, ann) => Frame::Throw(go_ctx(e0, c), sub_ann(ann, c)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Type {
        Type::var("a")
    }

    #[test]
    fn type_subst_avoids_capture() {
        // (forall b. a -> b)[b/a] must not capture.
        let s = Type::forall("b", Type::arrow(a(), Type::var("b")));
        let r = subst_type(&s, &Name::new("a"), &Type::var("b"));
        match r {
            Type::Forall(nb, body) => {
                assert_ne!(nb, Name::new("b"));
                assert_eq!(*body, Type::arrow(Type::var("b"), Type::Var(nb)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn type_subst_shadowed() {
        let s = Type::forall("a", a());
        assert_eq!(subst_type(&s, &Name::new("a"), &Type::var("z")), s);
    }

    #[test]
    fn term_subst_basic_and_shadow() {
        let body = Term::app(Term::var("x"), Term::var("y"));
        let r = subst_term(&body, &Name::new("x"), &Term::var("z"));
        assert_eq!(r, Term::app(Term::var("z"), Term::var("y")));
        let lam = Term::lam("x", a(), Term::var("x"));
        assert_eq!(subst_term(&lam, &Name::new("x"), &Term::var("z")), lam);
    }

    #[test]
    fn term_subst_renames_binder() {
        let lam = Term::lam("y", a(), Term::var("x"));
        let r = subst_term(&lam, &Name::new("x"), &Term::var("y"));
        match r {
            Term::Lam(ny, _, body) => {
                assert_ne!(ny, Name::new("y"));
                assert_eq!(*body, Term::var("y"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn type_into_term_renames_tylam() {
        // (tfun b -> fun (x:a) -> x)[b/a]
        let t = Term::ty_lam("b", Term::lam("x", a(), Term::var("x")));
        let r = subst_type_in_term(&t, &Name::new("a"), &Type::var("b"));
        match r {
            Term::TyLam(nb, body) => {
                assert_ne!(nb, Name::new("b"));
                assert_eq!(*body, Term::lam("x", Type::var("b"), Term::var("x")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cont_subst_reifies_throws() {
        let e = EvalContext::hole().with_inner(Frame::TyArg(a()));
        let t = Term::app(Term::throw("k", None, Term::var("v")), Term::shift("k", ContType::Delim(a(), a()), Term::throw("k", None, Term::var("w"))));
        let r = subst_cont(&t, &Name::new("k"), &e);
        let expected = Term::app(
            Term::throw_ctx(e.clone(), None, Term::var("v")),
            Term::shift("k", ContType::Delim(a(), a()), Term::throw("k", None, Term::var("w"))),
        );
        assert_eq!(r, expected);
    }

    #[test]
    fn subst_reaches_into_contexts() {
        let e = EvalContext::hole()
            .with_inner(Frame::Arg(Term::var("x")))
            .with_inner(Frame::Fun { param: Name::new("x"), ann: a(), body: Box::new(Term::var("x")) });
        let t = Term::throw_ctx(e, Some(a()), Term::var("x"));
        let r = subst_term(&t, &Name::new("x"), &Term::var("z"));
        let e2 = EvalContext::hole()
            .with_inner(Frame::Arg(Term::var("z")))
            .with_inner(Frame::Fun { param: Name::new("x"), ann: a(), body: Box::new(Term::var("x")) });
        assert_eq!(r, Term::throw_ctx(e2, Some(a()), Term::var("z")));
    }
}
