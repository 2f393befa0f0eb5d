//! Shrinking failing programs by replacing a subterm with one of its own
//! descendants, keeping only replacements that still typecheck at the
//! original type and still fail.

use crate::alpha::alpha_eq_type;
use crate::reduction::Program;
use crate::syntax::Term;
use crate::typing::check_program;

/// Candidate checks before giving up on further shrinking.
const MAX_CANDIDATES: usize = 2_000;

fn children(t: &Term) -> Vec<&Term> {
    match t {
        Term::Var(_) => vec![],
        Term::App(f, a) => vec![f, a],
        Term::Lam(_, _, b)
        | Term::TyLam(_, b)
        | Term::TyApp(b, _)
        | Term::Callcc(_, _, b)
        | Term::Shift(_, _, b)
        | Term::Reset(b)
        | Term::Throw(_, _, b)
        | Term::ThrowCtx(_, _, b) => vec![b],
    }
}

fn child_mut(t: &mut Term, i: usize) -> &mut Term {
    match (t, i) {
        (Term::App(f, _), 0) => f,
        (Term::App(_, a), 1) => a,
        (
            Term::Lam(_, _, b)
            | Term::TyLam(_, b)
            | Term::TyApp(b, _)
            | Term::Callcc(_, _, b)
            | Term::Shift(_, _, b)
            | Term::Reset(b)
            | Term::Throw(_, _, b)
            | Term::ThrowCtx(_, _, b),
            0,
        ) => b,
        _ => unreachable!("path leads to a missing child"),
    }
}

/// Every subterm with its path, outermost first.
pub fn subterms(t: &Term) -> Vec<(Vec<usize>, &Term)> {
    let mut out = Vec::new();
    let mut stack = vec![(Vec::new(), t)];
    while let Some((path, s)) = stack.pop() {
        for (i, c) in children(s).into_iter().enumerate().rev() {
            let mut p = path.clone();
            p.push(i);
            stack.push((p, c));
        }
        out.push((path, s));
    }
    out
}

pub fn replace_at(t: &Term, path: &[usize], new: Term) -> Term {
    let mut out = t.clone();
    let mut cur = &mut out;
    for &i in path {
        cur = child_mut(cur, i);
    }
    *cur = new;
    out
}

/// Greedily shrink `p` while `fails` holds.
pub fn shrink(p: &Program, fails: impl Fn(&Program) -> bool) -> Program {
    let Ok(ty) = check_program(&p.term, p.mode) else { return p.clone() };
    let mut best = p.clone();
    let mut checked = 0;
    'outer: loop {
        let mut candidates: Vec<Term> = Vec::new();
        for (path, s) in subterms(&best.term) {
            for (_, d) in subterms(s).into_iter().skip(1) {
                candidates.push(replace_at(&best.term, &path, d.clone()));
            }
        }
        candidates.sort_by_key(Term::size);
        for c in candidates {
            if checked >= MAX_CANDIDATES {
                break 'outer;
            }
            checked += 1;
            let well_typed = matches!(check_program(&c, p.mode), Ok(t) if alpha_eq_type(&t, &ty));
            let q = Program::new(p.mode, c);
            if well_typed && fails(&q) {
                best = q;
                continue 'outer;
            }
        }
        break;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse;
    use crate::syntax::CalcMode;

    #[test]
    fn paths_and_replacement() {
        let t = parse("(fun (x : forall a. a -> a) -> x) (tfun a -> fun (y:a) -> y)", CalcMode::ABORTIVE_CBV).unwrap();
        let subs = subterms(&t);
        assert_eq!(subs.len(), 6);
        assert_eq!(subs[0].0, Vec::<usize>::new());
        let arg = subs.iter().find(|(p, _)| p == &vec![1]).unwrap().1.clone();
        assert_eq!(replace_at(&t, &[], arg.clone()), arg);
    }

    #[test]
    fn shrinks_to_a_smaller_failing_program() {
        let mode = CalcMode::ABORTIVE_CBV;
        let t = parse(
            "(fun (x : forall a. a -> a) -> x) ((fun (z : forall a. a -> a) -> z) (tfun a -> fun (y:a) -> y))",
            mode,
        )
        .unwrap();
        // "Fails" whenever the program contains an application.
        let has_app = |q: &Program| subterms(&q.term).iter().any(|(_, s)| matches!(s, Term::App(..)));
        let small = shrink(&Program::new(mode, t.clone()), has_app);
        assert!(small.term.size() < t.size());
        assert!(has_app(&small));
        assert!(check_program(&small.term, mode).is_ok());
    }
}
