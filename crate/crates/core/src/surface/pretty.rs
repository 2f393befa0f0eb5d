use std::fmt::Write;

use super::HOLE;
use crate::syntax::{ContType, EvalContext, Frame, MetaType, Metacontext, Name, Term, Type};

pub fn pretty_type(t: &Type) -> String {
    let mut s = String::new();
    ty(&mut s, t, false);
    s
}

fn ty(out: &mut String, t: &Type, atomic: bool) {
    let needs_parens = atomic && matches!(t, Type::Arrow(..) | Type::ArrowD(..) | Type::Forall(..) | Type::ForallD(..));
    if needs_parens {
        out.push('(');
    }
    match t {
        Type::Var(a) => out.push_str(a.as_str()),
        Type::Meta(n) => {
            let _ = write!(out, "?{n}");
        }
        Type::Comp(s, t, u) => {
            out.push('{');
            ty(out, s, false);
            out.push_str(", ");
            ty(out, t, false);
            out.push_str(", ");
            ty(out, u, false);
            out.push('}');
        }
        Type::Arrow(s, t) => {
            ty(out, s, true);
            out.push_str(" -> ");
            ty(out, t, false);
        }
        Type::ArrowD(s, t, u, v) => {
            ty(out, s, true);
            out.push_str(" -> ");
            annotated_body(out, t);
            answers(out, u, v);
        }
        Type::Forall(a, s) => {
            let _ = write!(out, "forall {a}. ");
            ty(out, s, false);
        }
        Type::ForallD(a, s, t, u) => {
            let _ = write!(out, "forall {a}. ");
            annotated_body(out, s);
            answers(out, t, u);
        }
    }
    if needs_parens {
        out.push(')');
    }
}

/// The part of an annotated type that precedes its `@` clause. A plain arrow
/// or forall there would capture the clause when re-parsed.
fn annotated_body(out: &mut String, t: &Type) {
    if matches!(t, Type::Arrow(..) | Type::Forall(..)) {
        out.push('(');
        ty(out, t, false);
        out.push(')');
    } else {
        ty(out, t, false);
    }
}

fn answers(out: &mut String, u: &Type, v: &Type) {
    out.push_str(" @ [");
    ty(out, u, false);
    out.push_str(", ");
    ty(out, v, false);
    out.push(']');
}

/// `S cont` or `(S, T) cont`.
pub fn pretty_cont_type(c: &ContType) -> String {
    match c {
        ContType::Abort(s) => format!("{} cont", pretty_type(s)),
        ContType::Delim(s, t) => format!("({}, {}) cont", pretty_type(s), pretty_type(t)),
    }
}

/// Binder form: `S cont` or `S cont T`.
fn binder_cont_type(c: &ContType) -> String {
    match c {
        ContType::Abort(s) => format!("{} cont", pretty_type(s)),
        ContType::Delim(s, t) => format!("{} cont {}", pretty_type(s), pretty_type(t)),
    }
}

pub fn pretty_meta_type(m: &MetaType) -> String {
    format!("not {}", pretty_type(&m.0))
}

pub fn pretty(t: &Term) -> String {
    let mut s = String::new();
    term(&mut s, t, Prec::Top);
    s
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Top,
    App,
    Atom,
}

fn term(out: &mut String, t: &Term, prec: Prec) {
    let own = match t {
        Term::Var(_) => Prec::Atom,
        Term::App(..) | Term::TyApp(..) => Prec::App,
        _ => Prec::Top,
    };
    let parens = own < prec;
    if parens {
        out.push('(');
    }
    match t {
        Term::Var(x) => out.push_str(x.as_str()),
        Term::Lam(x, ann, body) => {
            let _ = write!(out, "fun ({x}:{}) -> ", pretty_type(ann));
            term(out, body, Prec::Top);
        }
        Term::App(f, a) => {
            term(out, f, Prec::App);
            out.push(' ');
            term(out, a, Prec::Atom);
        }
        Term::TyLam(a, body) => {
            let _ = write!(out, "tfun {a} -> ");
            term(out, body, Prec::Top);
        }
        Term::TyApp(f, ann) => {
            term(out, f, Prec::App);
            let _ = write!(out, " [{}]", pretty_type(ann));
        }
        Term::Callcc(k, ann, body) => {
            let _ = write!(out, "callcc ({k} : {}) -> ", binder_cont_type(ann));
            term(out, body, Prec::Top);
        }
        Term::Shift(k, ann, body) => {
            let _ = write!(out, "shift ({k} : {}) -> ", binder_cont_type(ann));
            term(out, body, Prec::Top);
        }
        Term::Reset(body) => {
            out.push_str("reset ");
            term(out, body, Prec::Top);
        }
        Term::Throw(k, ann, body) => {
            out.push_str("throw");
            throw_ann(out, ann);
            let _ = write!(out, " {k} ");
            term(out, body, Prec::Top);
        }
        Term::ThrowCtx(e, ann, body) => {
            out.push_str("throw");
            throw_ann(out, ann);
            out.push(' ');
            out.push_str(&pretty_reified(e));
            out.push(' ');
            term(out, body, Prec::Top);
        }
    }
    if parens {
        out.push(')');
    }
}

fn throw_ann(out: &mut String, ann: &Option<Type>) {
    if let Some(t) = ann {
        let _ = write!(out, "[{}]", pretty_type(t));
    }
}

fn hole() -> Term {
    Term::Var(Name::new(HOLE))
}

/// One frame with its hole written `[]`, e.g. `[] [T]` or `(fun (x:T) -> t) []`.
pub fn pretty_frame(f: &Frame) -> String {
    pretty(&f.wrap(hole()))
}

/// A context as a term with a hole, e.g. `[]` or `([] [T]) v`.
pub fn pretty_context(e: &EvalContext) -> String {
    let plugged = e.frames_inner_first().fold(hole(), |acc, f| f.wrap(acc));
    pretty(&plugged)
}

/// A context in reified form, `^[f1; f2]` with the innermost frame first.
pub fn pretty_reified(e: &EvalContext) -> String {
    let frames: Vec<String> = e.frames_inner_first().map(pretty_frame).collect();
    format!("^[{}]", frames.join("; "))
}

/// A metacontext as its contexts, top first, separated by `·`; `•` when empty.
pub fn pretty_metacontext(f: &Metacontext) -> String {
    if f.is_empty() {
        return "•".to_string();
    }
    let parts: Vec<String> = f.top_first().map(pretty_context).collect();
    parts.join(" · ")
}

pub fn pretty_judgment(s: &Type, t: &Type, u: &Type) -> String {
    format!("({}, {}, {})", pretty_type(s), pretty_type(t), pretty_type(u))
}
