use fctl::alpha::{alpha_eq_term, alpha_eq_type};
use fctl::harness::gen::{type_b, type_u};
use fctl::harness::shrink::{replace_at, subterms};
use fctl::harness::{gen_case, GenConfig};
use fctl::machine::{machine_eval, MachineOutcome};
use fctl::reduction::{decompose, evaluate, step, trace, Program};
use fctl::subst::{subst_term, subst_type, subst_type_in_term};
use fctl::surface::{parse, pretty};
use fctl::syntax::{ContType, Frame};
use fctl::typing::abortive::infer_term;
use fctl::typing::delimited::{infer_term_delim, tidy};
use fctl::typing::{check_program, TypeEnvD, TypeEnvG};
use fctl::{CalcMode, Name, Term, Type};
use proptest::prelude::*;

fn program(mode: CalcMode, seed: u64, control: f64) -> Program {
    let cfg = GenConfig { control_prob: control, max_depth: 6, ..GenConfig::new(mode, seed) };
    gen_case(&cfg, 0).expect("generation succeeds").1
}

fn abortive_mode() -> impl Strategy<Value = CalcMode> {
    prop_oneof![Just(CalcMode::ABORTIVE_CBV), Just(CalcMode::ABORTIVE_CBN)]
}

fn any_mode() -> impl Strategy<Value = CalcMode> {
    prop::sample::select(CalcMode::ALL.to_vec())
}

fn empty() -> (TypeEnvG, TypeEnvD) {
    (TypeEnvG::default(), TypeEnvD::default())
}

fn judgment_eq(a: &[Type; 3], b: &[Type; 3]) -> bool {
    let (a, b) = (tidy(a), tidy(b));
    a.iter().zip(&b).all(|(s, t)| alpha_eq_type(s, t))
}

fn delim_judgment(g: &TypeEnvG, d: &TypeEnvD, t: &Term, mode: CalcMode) -> [Type; 3] {
    let j = infer_term_delim(g, d, t, mode).expect("well typed");
    [j.ty, j.ans_in, j.ans_out]
}

/// Closed value subterms (outside reified contexts) with their paths.
fn closed_values(t: &Term) -> Vec<(Vec<usize>, Term)> {
    subterms(t).into_iter().filter(|(_, s)| s.is_value() && s.is_closed()).map(|(p, s)| (p, s.clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn weakening(mode in any_mode(), seed in any::<u64>()) {
        let p = program(mode, seed, 0.3);
        let (g, d) = empty();
        let mut g2 = g.clone();
        g2.0.push((Name::new("unused'x"), type_b()));
        let mut d2 = d.clone();
        if mode.is_delimited() {
            d2.0.push((Name::new("unused'k"), ContType::Delim(type_u(), type_u())));
            let t = &p.term;
            prop_assert!(judgment_eq(&delim_judgment(&g, &d, t, mode), &delim_judgment(&g2, &d2, t, mode)));
        } else {
            d2.0.push((Name::new("unused'k"), ContType::Abort(type_u())));
            let a = infer_term(&g, &d, &p.term, mode).unwrap();
            let b = infer_term(&g2, &d2, &p.term, mode).unwrap();
            prop_assert!(alpha_eq_type(&a, &b));
        }
    }

    #[test]
    fn substituting_a_value_keeps_the_type(mode in abortive_mode(), seed in any::<u64>()) {
        let p = program(mode, seed, 0.3);
        let (g, d) = empty();
        let ty = infer_term(&g, &d, &p.term, mode).unwrap();
        for (path, v) in closed_values(&p.term).into_iter().take(4) {
            let s = infer_term(&g, &d, &v, mode).unwrap();
            let x = Name::new("hole'x");
            let open = replace_at(&p.term, &path, Term::Var(x.clone()));
            let mut gx = g.clone();
            gx.0.push((x.clone(), s.clone()));
            prop_assert!(alpha_eq_type(&infer_term(&gx, &d, &open, mode).unwrap(), &ty));
            let back = subst_term(&open, &x, &v);
            prop_assert!(alpha_eq_type(&infer_term(&g, &d, &back, mode).unwrap(), &ty));
            // A different value of the same type works as well.
            if alpha_eq_type(&s, &type_u()) {
                let id = Term::ty_lam("c", Term::lam("y", Type::var("c"), Term::var("y")));
                prop_assert!(alpha_eq_type(&infer_term(&g, &d, &subst_term(&open, &x, &id), mode).unwrap(), &ty));
            }
        }
    }

    #[test]
    fn type_substitution_commutes(mode in abortive_mode(), seed in any::<u64>()) {
        let p = program(mode, seed, 0.3);
        let (g, d) = empty();
        for (_, s) in subterms(&p.term) {
            let Term::TyLam(a, body) = s else { continue };
            let fv = body.free_vars();
            if !fv.terms.is_empty() || !fv.conts.is_empty() || fv.types.iter().any(|b| b != a) {
                continue;
            }
            let sty = infer_term(&g, &d, body, mode).unwrap();
            for v in [type_u(), type_b()] {
                let inst = infer_term(&g, &d, &subst_type_in_term(body, a, &v), mode).unwrap();
                prop_assert!(alpha_eq_type(&inst, &subst_type(&sty, a, &v)));
            }
        }
    }

    #[test]
    fn pretty_then_parse_is_identity(mode in any_mode(), seed in any::<u64>()) {
        let p = program(mode, seed, 0.3);
        let back = parse(&pretty(&p.term), mode).unwrap();
        prop_assert!(alpha_eq_term(&back, &p.term));
    }

    #[test]
    fn stepping_is_deterministic(mode in any_mode(), seed in any::<u64>()) {
        let p = program(mode, seed, 0.3);
        prop_assert_eq!(step(&p), step(&p));
        prop_assert_eq!(evaluate(&p, 10_000), evaluate(&p, 10_000));
    }

    #[test]
    fn call_by_name_contexts_have_no_value_frames(seed in any::<u64>(), delimited in any::<bool>()) {
        let mode = if delimited { CalcMode::DELIMITED_CBN } else { CalcMode::ABORTIVE_CBN };
        let p = program(mode, seed, 0.3);
        let tr = trace(&p, 10_000);
        let by_value = |f: &Frame| matches!(f, Frame::Fun { .. } | Frame::Throw(..));
        for s in &tr.steps {
            let d = &s.decomposition;
            prop_assert!(!d.context.frames_inner_first().any(by_value));
            if let Some(f) = &d.metacontext {
                prop_assert!(!f.top_first().any(|e| e.frames_inner_first().any(by_value)));
            }
        }
        prop_assert!(decompose(&p).is_ok());
    }

    #[test]
    fn machine_work_is_bounded(mode in any_mode(), seed in any::<u64>()) {
        let p = program(mode, seed, 0.3);
        let steps = evaluate(&p, 10_000).steps();
        match machine_eval(&p, 1_000_000) {
            MachineOutcome::Normalized { transitions, max_frames, .. } => {
                let bound = 4 * (steps + 1) * (max_frames as u64 + 1) + 2 * p.term.size() as u64;
                prop_assert!(transitions <= bound, "{transitions} > {bound}");
            }
            other => prop_assert!(false, "machine did not finish: {other:?}"),
        }
    }

    #[test]
    fn control_free_delimited_terms_are_pure(seed in any::<u64>(), cbn in any::<bool>()) {
        let mode = if cbn { CalcMode::DELIMITED_CBN } else { CalcMode::DELIMITED_CBV };
        let p = program(mode, seed, 0.0);
        let (g, d) = empty();
        let inner = match &p.term {
            Term::Reset(t) => (**t).clone(),
            other => other.clone(),
        };
        // The whole program is answer-type polymorphic.
        let [_, tin, tout] = delim_judgment(&g, &d, &p.term, mode);
        prop_assert!(matches!(tin, Type::Meta(_)), "{tin:?}");
        prop_assert_eq!(tin, tout);
        // Its body is pure, though annotations on bound variables may fix
        // the answer type.
        let [_, tin, tout] = delim_judgment(&g, &d, &inner, mode);
        prop_assert!(alpha_eq_type(&tin, &tout), "{tin:?} vs {tout:?}");
        prop_assert!(check_program(&p.term, mode).is_ok());
        prop_assert!(evaluate(&p, 10_000).is_normalized());
    }
}
