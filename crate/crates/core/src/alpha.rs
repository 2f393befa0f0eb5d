//! Alpha-equivalence of terms, types and contexts.

use crate::syntax::{ContType, EvalContext, Frame, Name, Term, Type};

#[derive(Default)]
struct Env {
    terms: (Vec<Name>, Vec<Name>),
    types: (Vec<Name>, Vec<Name>),
    conts: (Vec<Name>, Vec<Name>),
}

/// Both bound at the same depth, or both free with the same name.
fn same_var(scope: &(Vec<Name>, Vec<Name>), x: &Name, y: &Name) -> bool {
    let i = scope.0.iter().rposition(|n| n == x);
    let j = scope.1.iter().rposition(|n| n == y);
    match (i, j) {
        (Some(i), Some(j)) => i == j,
        (None, None) => x == y,
        _ => false,
    }
}

fn push(scope: &mut (Vec<Name>, Vec<Name>), x: &Name, y: &Name) {
    scope.0.push(x.clone());
    scope.1.push(y.clone());
}

pub fn alpha_eq_type(s: &Type, t: &Type) -> bool {
    ty(&mut Env::default().types, s, t)
}

pub fn alpha_eq_term(s: &Term, t: &Term) -> bool {
    term(&mut Env::default(), s, t)
}

pub fn alpha_eq_context(e: &EvalContext, f: &EvalContext) -> bool {
    ctx(&mut Env::default(), e, f)
}

fn ty(sc: &mut (Vec<Name>, Vec<Name>), s: &Type, t: &Type) -> bool {
    match (s, t) {
        (Type::Var(a), Type::Var(b)) => same_var(sc, a, b),
        (Type::Meta(m), Type::Meta(n)) => m == n,
        (Type::Arrow(a, b), Type::Arrow(c, d)) => ty(sc, a, c) && ty(sc, b, d),
        (Type::ArrowD(a, b, c, d), Type::ArrowD(e, f, g, h)) => {
            ty(sc, a, e) && ty(sc, b, f) && ty(sc, c, g) && ty(sc, d, h)
        }
        (Type::Comp(a, b, c), Type::Comp(d, e, f)) => ty(sc, a, d) && ty(sc, b, e) && ty(sc, c, f),
        (Type::Forall(a, x), Type::Forall(b, y)) => {
            push(sc, a, b);
            let ok = ty(sc, x, y);
            pop(sc);
            ok
        }
        (Type::ForallD(a, x1, x2, x3), Type::ForallD(b, y1, y2, y3)) => {
            push(sc, a, b);
            let ok = ty(sc, x1, y1) && ty(sc, x2, y2) && ty(sc, x3, y3);
            pop(sc);
            ok
        }
        _ => false,
    }
}

fn pop(sc: &mut (Vec<Name>, Vec<Name>)) {
    sc.0.pop();
    sc.1.pop();
}

fn cont_ty(sc: &mut (Vec<Name>, Vec<Name>), a: &ContType, b: &ContType) -> bool {
    match (a, b) {
        (ContType::Abort(s), ContType::Abort(t)) => ty(sc, s, t),
        (ContType::Delim(s1, t1), ContType::Delim(s2, t2)) => ty(sc, s1, s2) && ty(sc, t1, t2),
        _ => false,
    }
}

fn ann(sc: &mut (Vec<Name>, Vec<Name>), a: &Option<Type>, b: &Option<Type>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(s), Some(t)) => ty(sc, s, t),
        _ => false,
    }
}

fn term(env: &mut Env, s: &Term, t: &Term) -> bool {
    match (s, t) {
        (Term::Var(x), Term::Var(y)) => same_var(&env.terms, x, y),
        (Term::Lam(x, a1, b1), Term::Lam(y, a2, b2)) => {
            if !ty(&mut env.types, a1, a2) {
                return false;
            }
            push(&mut env.terms, x, y);
            let ok = term(env, b1, b2);
            pop(&mut env.terms);
            ok
        }
        (Term::App(f1, a1), Term::App(f2, a2)) => term(env, f1, f2) && term(env, a1, a2),
        (Term::TyLam(a, b1), Term::TyLam(b, b2)) => {
            push(&mut env.types, a, b);
            let ok = term(env, b1, b2);
            pop(&mut env.types);
            ok
        }
        (Term::TyApp(b1, t1), Term::TyApp(b2, t2)) => ty(&mut env.types, t1, t2) && term(env, b1, b2),
        (Term::Callcc(k1, c1, b1), Term::Callcc(k2, c2, b2))
        | (Term::Shift(k1, c1, b1), Term::Shift(k2, c2, b2)) => {
            if !cont_ty(&mut env.types, c1, c2) {
                return false;
            }
            push(&mut env.conts, k1, k2);
            let ok = term(env, b1, b2);
            pop(&mut env.conts);
            ok
        }
        (Term::Reset(a), Term::Reset(b)) => term(env, a, b),
        (Term::Throw(k1, a1, b1), Term::Throw(k2, a2, b2)) => {
            same_var(&env.conts, k1, k2) && ann(&mut env.types, a1, a2) && term(env, b1, b2)
        }
        (Term::ThrowCtx(e1, a1, b1), Term::ThrowCtx(e2, a2, b2)) => {
            ctx(env, e1, e2) && ann(&mut env.types, a1, a2) && term(env, b1, b2)
        }
        _ => false,
    }
}

fn ctx(env: &mut Env, e: &EvalContext, f: &EvalContext) -> bool {
    e.len() == f.len() && e.frames_inner_first().zip(f.frames_inner_first()).all(|(a, b)| frame(env, a, b))
}

fn frame(env: &mut Env, a: &Frame, b: &Frame) -> bool {
    match (a, b) {
        (Frame::Fun { param: x, ann: a1, body: b1 }, Frame::Fun { param: y, ann: a2, body: b2 }) => {
            if !ty(&mut env.types, a1, a2) {
                return false;
            }
            push(&mut env.terms, x, y);
            let ok = term(env, b1, b2);
            pop(&mut env.terms);
            ok
        }
        (Frame::Arg(s), Frame::Arg(t)) => term(env, s, t),
        (Frame::TyArg(s), Frame::TyArg(t)) => ty(&mut env.types, s, t),
        (Frame::Throw(e1, a1), Frame::Throw(e2, a2)) => ctx(env, e1, e2) && ann(&mut env.types, a1, a2),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renamed_binders_are_equal() {
        let s = Type::forall("a", Type::arrow(Type::var("a"), Type::var("a")));
        let t = Type::forall("b", Type::arrow(Type::var("b"), Type::var("b")));
        assert!(alpha_eq_type(&s, &t));
        let u = Type::forall("b", Type::arrow(Type::var("b"), Type::var("a")));
        assert!(!alpha_eq_type(&s, &u));
    }

    #[test]
    fn free_vs_bound() {
        let s = Term::lam("x", Type::var("a"), Term::var("y"));
        let t = Term::lam("y", Type::var("a"), Term::var("y"));
        assert!(!alpha_eq_term(&s, &t));
        let t2 = Term::lam("z", Type::var("a"), Term::var("y"));
        assert!(alpha_eq_term(&s, &t2));
    }

    #[test]
    fn shadowing() {
        let s = Term::lam("x", Type::var("a"), Term::lam("x", Type::var("a"), Term::var("x")));
        let t = Term::lam("x", Type::var("a"), Term::lam("y", Type::var("a"), Term::var("y")));
        let u = Term::lam("x", Type::var("a"), Term::lam("y", Type::var("a"), Term::var("x")));
        assert!(alpha_eq_term(&s, &t));
        assert!(!alpha_eq_term(&s, &u));
    }

    #[test]
    fn continuation_binders() {
        let c = ContType::Abort(Type::var("a"));
        let s = Term::callcc("k", c.clone(), Term::throw("k", Some(Type::var("a")), Term::var("v")));
        let t = Term::callcc("j", c, Term::throw("j", Some(Type::var("a")), Term::var("v")));
        assert!(alpha_eq_term(&s, &t));
    }
}
