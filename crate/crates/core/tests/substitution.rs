use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};

use fctl::alpha::{alpha_eq_term, alpha_eq_type};
use fctl::reduction::{step, Program, Step};
use fctl::subst::{subst_term, subst_type_in_term};
use fctl::syntax::ContType;
use fctl::{CalcMode, Name, Term, Type};
use proptest::prelude::*;

fn arb_type() -> impl Strategy<Value = Type> {
    let leaf = prop_oneof![Just(Type::var("a")), Just(Type::var("b"))];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(s, t)| Type::arrow(s, t)),
            (prop_oneof![Just("a"), Just("b")], inner).prop_map(|(a, s)| Type::forall(a, s)),
        ]
    })
}

fn var_name() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("x"), Just("y"), Just("z")]
}

fn cont_name() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("k"), Just("j")]
}

/// Scope-unaware terms: free variables of every sort occur freely.
fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = var_name().prop_map(Term::var);
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (var_name(), arb_type(), inner.clone()).prop_map(|(x, s, b)| Term::lam(x, s, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            (prop_oneof![Just("a"), Just("b")], inner.clone()).prop_map(|(a, b)| Term::ty_lam(a, b)),
            (inner.clone(), arb_type()).prop_map(|(f, s)| Term::ty_app(f, s)),
            (cont_name(), arb_type(), inner.clone()).prop_map(|(k, s, b)| Term::callcc(k, ContType::Abort(s), b)),
            (cont_name(), arb_type(), inner).prop_map(|(k, s, b)| Term::throw(k, Some(s), b)),
        ]
    })
}

fn closed_value() -> impl Strategy<Value = Term> {
    arb_type().prop_map(|s| {
        let s = Type::forall("a", Type::arrow(Type::var("a"), s));
        Term::lam("w", s, Term::var("w"))
    })
}

static COUNTER: AtomicU32 = AtomicU32::new(0);

fn fresh(base: &Name) -> Name {
    Name::new(&format!("{}_r{}", base.as_str(), COUNTER.fetch_add(1, Ordering::Relaxed)))
}

/// Rename every binder, written independently of the library's substitution.
#[derive(Clone, Default)]
struct Renaming {
    terms: HashMap<Name, Name>,
    types: HashMap<Name, Name>,
    conts: HashMap<Name, Name>,
}

fn rn(m: &HashMap<Name, Name>, x: &Name) -> Name {
    m.get(x).cloned().unwrap_or_else(|| x.clone())
}

fn rename_type(s: &Type, r: &Renaming) -> Type {
    match s {
        Type::Var(a) => Type::Var(rn(&r.types, a)),
        Type::Arrow(s, t) => Type::arrow(rename_type(s, r), rename_type(t, r)),
        Type::Forall(a, s) => {
            let mut r = r.clone();
            let b = fresh(a);
            r.types.insert(a.clone(), b.clone());
            Type::Forall(b, rename_type(s, &r).into())
        }
        other => panic!("not generated: {other:?}"),
    }
}

fn rename(t: &Term, r: &Renaming) -> Term {
    match t {
        Term::Var(x) => Term::Var(rn(&r.terms, x)),
        Term::Lam(x, s, b) => {
            let mut r2 = r.clone();
            let y = fresh(x);
            r2.terms.insert(x.clone(), y.clone());
            Term::Lam(y, rename_type(s, r), Box::new(rename(b, &r2)))
        }
        Term::App(f, a) => Term::app(rename(f, r), rename(a, r)),
        Term::TyLam(a, b) => {
            let mut r2 = r.clone();
            let c = fresh(a);
            r2.types.insert(a.clone(), c.clone());
            Term::TyLam(c, Box::new(rename(b, &r2)))
        }
        Term::TyApp(f, s) => Term::ty_app(rename(f, r), rename_type(s, r)),
        Term::Callcc(k, ContType::Abort(s), b) => {
            let mut r2 = r.clone();
            let j = fresh(k);
            r2.conts.insert(k.clone(), j.clone());
            Term::Callcc(j, ContType::Abort(rename_type(s, r)), Box::new(rename(b, &r2)))
        }
        Term::Throw(k, Some(s), b) => Term::Throw(rn(&r.conts, k), Some(rename_type(s, r)), Box::new(rename(b, r))),
        other => panic!("not generated: {other:?}"),
    }
}

fn x() -> Name {
    Name::new("x")
}

fn y() -> Name {
    Name::new("y")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn alpha_eq_is_an_equivalence(t in arb_term()) {
        let r1 = rename(&t, &Renaming::default());
        let r2 = rename(&r1, &Renaming::default());
        prop_assert!(alpha_eq_term(&t, &t));
        prop_assert!(alpha_eq_term(&t, &r1));
        prop_assert!(alpha_eq_term(&r1, &t));
        prop_assert!(alpha_eq_term(&r1, &r2) && alpha_eq_term(&t, &r2));
    }

    #[test]
    fn type_alpha_eq_survives_renaming(s in arb_type()) {
        prop_assert!(alpha_eq_type(&s, &rename_type(&s, &Renaming::default())));
    }

    #[test]
    fn substitution_composes(t in arb_term(), s1 in arb_term(), s2 in closed_value()) {
        // x != y and y is not free in the closed s2.
        let lhs = subst_term(&subst_term(&t, &x(), &s1), &y(), &s2);
        let rhs = subst_term(&subst_term(&t, &y(), &s2), &x(), &subst_term(&s1, &y(), &s2));
        prop_assert!(alpha_eq_term(&lhs, &rhs));
    }

    #[test]
    fn substitution_respects_alpha(t in arb_term(), s in arb_term(), ty in arb_type()) {
        let t2 = rename(&t, &Renaming::default());
        let s2 = rename(&s, &Renaming::default());
        prop_assert!(alpha_eq_term(&subst_term(&t, &x(), &s), &subst_term(&t2, &x(), &s2)));
        let a = Name::new("a");
        prop_assert!(alpha_eq_term(&subst_type_in_term(&t, &a, &ty), &subst_type_in_term(&t2, &a, &ty)));
    }

    #[test]
    fn substituting_a_closed_value_removes_the_variable(t in arb_term(), v in closed_value()) {
        let fv = subst_term(&t, &x(), &v).free_vars();
        prop_assert!(!fv.terms.contains(&x()));
        let mut expected = t.free_vars().terms;
        expected.remove(&x());
        prop_assert_eq!(fv.terms, expected);
    }

    #[test]
    fn values_do_not_step(t in arb_term(), s in arb_type()) {
        let v = Term::lam("x", s, t.clone());
        for mode in [CalcMode::ABORTIVE_CBV, CalcMode::ABORTIVE_CBN] {
            prop_assert!(v.is_value());
            prop_assert!(matches!(step(&Program::new(mode, v.clone())), Step::Finished(_)));
            let tv = Term::ty_lam("a", t.clone());
            prop_assert!(matches!(step(&Program::new(mode, tv)), Step::Finished(_)));
        }
    }
}
