//! Goal-directed generation of closed, well-typed programs.
//!
//! Abortive terms are generated against a goal type, delimited terms against
//! a goal judgment `(S, T, U)`. Each node picks a typing rule whose
//! conclusion matches the goal and recurses on the premises, retrying other
//! choices when a premise cannot be met.
//!
//! Depth counts nested eliminations and control operators; abstractions and
//! variables are free, since the goal type already bounds them. Depth 1 thus
//! yields values only.

use std::sync::Arc;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::alpha::alpha_eq_type;
use crate::reduction::Program;
use crate::subst::subst_type;
use crate::syntax::{CalcMode, ContType, Name, Term, Type};
use crate::typing::{check_program, TypeError};

/// Attempts per node before the node gives up.
pub const BACKTRACK_BUDGET: usize = 200;
/// Rule applications per program before generation is abandoned.
const CALL_LIMIT: usize = 2_000;
/// Fresh seeds tried per case before reporting exhaustion.
const RESEEDS: u64 = 64;

#[derive(Clone, Debug, Serialize)]
pub struct GenConfig {
    pub mode: CalcMode,
    pub seed: u64,
    pub max_depth: u32,
    pub max_type_depth: u32,
    pub control_prob: f64,
    pub count: usize,
}

impl GenConfig {
    pub fn new(mode: CalcMode, seed: u64) -> Self {
        GenConfig { mode, seed, max_depth: 8, max_type_depth: 2, control_prob: 0.3, count: 100 }
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("generation exhausted after {0} rule applications")]
    Exhausted(usize),
    #[error("generated program is ill-typed: {0}")]
    IllTyped(TypeError),
}

/// SplitMix64 finalizer: independent seeds for case `index` of a run.
pub fn case_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One generation attempt with `cfg.seed`.
pub fn gen_typed_program(cfg: &GenConfig) -> Result<Program, GenError> {
    let mut g = Gen::new(cfg, cfg.seed);
    let term = g.program().ok_or(GenError::Exhausted(g.calls))?;
    check_program(&term, cfg.mode).map_err(GenError::IllTyped)?;
    Ok(Program::new(cfg.mode, term))
}

/// Program number `index` of a run, reseeding on exhaustion. Returns the
/// seed that produced it, which reproduces it through [`gen_typed_program`].
pub fn gen_case(cfg: &GenConfig, index: u64) -> Result<(u64, Program), GenError> {
    let base = case_seed(cfg.seed, index);
    let mut last = GenError::Exhausted(0);
    for attempt in 0..RESEEDS {
        let seed = if attempt == 0 { base } else { case_seed(base, attempt) };
        match gen_typed_program(&GenConfig { seed, ..cfg.clone() }) {
            Ok(p) => return Ok((seed, p)),
            Err(e @ GenError::IllTyped(_)) => return Err(e),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// `cfg.count` programs, in case order.
pub fn gen_programs(cfg: &GenConfig) -> Vec<Result<(u64, Program), GenError>> {
    (0..cfg.count as u64).map(|i| gen_case(cfg, i)).collect()
}

fn tv(a: &str) -> Type {
    Type::var(a)
}

/// forall a. a -> a
pub fn type_u() -> Type {
    Type::forall("a", Type::arrow(tv("a"), tv("a")))
}

/// forall a. a -> a -> a
pub fn type_b() -> Type {
    Type::forall("a", Type::arrow(tv("a"), Type::arrow(tv("a"), tv("a"))))
}

/// forall a. (a -> a) -> a -> a
pub fn type_n() -> Type {
    let f = Type::arrow(tv("a"), tv("a"));
    Type::forall("a", Type::arrow(f.clone(), f))
}

/// The delimited counterpart of a pure abortive type: every answer
/// annotation is the innermost bound variable, or `ans` outside all binders.
pub fn delimit(t: &Type, ans: &Type, cbn: bool) -> Type {
    match t {
        Type::Var(_) => t.clone(),
        Type::Arrow(a, b) => {
            let param = delimit(a, ans, cbn);
            let param = if cbn { Type::comp(param, ans.clone(), ans.clone()) } else { param };
            Type::arrow_d(param, delimit(b, ans, cbn), ans.clone(), ans.clone())
        }
        Type::Forall(a, s) => {
            let av = Type::Var(a.clone());
            Type::ForallD(a.clone(), Arc::new(delimit(s, &av, cbn)), Arc::new(av.clone()), Arc::new(av))
        }
        other => other.clone(),
    }
}

struct Gen<'a> {
    cfg: &'a GenConfig,
    rng: ChaCha8Rng,
    calls: usize,
    next: u32,
    gamma: Vec<(Name, Type)>,
    delta: Vec<(Name, ContType)>,
    leaves: Vec<Type>,
}

/// Delimited goal `(S, T, U)`.
#[derive(Clone, Debug)]
struct Goal {
    s: Type,
    t: Type,
    u: Type,
}

impl Goal {
    fn new(s: Type, t: Type, u: Type) -> Self {
        Goal { s, t, u }
    }

    fn pure(&self) -> bool {
        alpha_eq_type(&self.t, &self.u)
    }
}

#[derive(Clone, Copy, Debug)]
enum Choice {
    Var(usize),
    Intro,
    App,
    TyApp,
    PolyApp,
    Callcc,
    Throw(usize),
    Shift,
    Reset,
}

impl<'a> Gen<'a> {
    fn new(cfg: &'a GenConfig, seed: u64) -> Self {
        let mode = cfg.mode;
        let base = [type_u(), type_b(), type_n()];
        let leaves = if mode.is_delimited() {
            let dummy = tv("a");
            base.iter().map(|t| delimit(t, &dummy, mode.is_cbn())).collect()
        } else {
            base.to_vec()
        };
        Gen {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
            calls: 0,
            next: 0,
            gamma: Vec::new(),
            delta: Vec::new(),
            leaves,
        }
    }

    fn fresh(&mut self, stem: &str) -> Name {
        self.next += 1;
        Name::new(&format!("{stem}{}", self.next))
    }

    fn control_allowed(&self) -> bool {
        self.cfg.control_prob > 0.0
    }

    fn leaf(&mut self) -> Type {
        self.leaves.choose(&mut self.rng).expect("nonempty universe").clone()
    }

    /// A closed, inhabited type of bounded depth.
    fn ty(&mut self, depth: u32) -> Type {
        if depth == 0 || self.rng.gen_bool(0.6) {
            return self.leaf();
        }
        let a = self.ty(depth - 1);
        let b = self.ty(depth - 1);
        if !self.cfg.mode.is_delimited() {
            return Type::arrow(a, b);
        }
        let c = self.leaf();
        let d = if self.control_allowed() && self.rng.gen_bool(0.3) { self.leaf() } else { c.clone() };
        let param = if self.cfg.mode.is_cbn() {
            let x = self.leaf();
            Type::comp(a, x.clone(), x)
        } else {
            a
        };
        Type::arrow_d(param, b, c, d)
    }

    fn arg_type(&mut self) -> Type {
        let from_env = !self.gamma.is_empty() && self.rng.gen_bool(0.3);
        if from_env {
            let (_, t) = self.gamma.choose(&mut self.rng).expect("nonempty").clone();
            match t {
                // Under call-by-name the environment holds computation triples.
                Type::Comp(s, ..) => (*s).clone(),
                t => t,
            }
        } else {
            let d = self.cfg.max_type_depth;
            self.ty(d)
        }
    }

    fn program(&mut self) -> Option<Term> {
        let depth = self.cfg.max_depth.max(1);
        let d = self.cfg.max_type_depth;
        if self.cfg.mode.is_delimited() {
            let s = self.ty(d);
            // An answer type other than `s` forces a control effect.
            let v = if depth > 1 && self.control_allowed() { self.answer(&s, depth) } else { s.clone() };
            let body = self.delim(&Goal::new(v.clone(), v, s), depth)?;
            Some(Term::reset(body))
        } else {
            let goal = self.ty(d);
            self.abort(&goal, depth)
        }
    }

    fn budget_left(&mut self) -> bool {
        self.calls += 1;
        self.calls <= CALL_LIMIT
    }

    /// Pick a rule: control with the configured probability, otherwise an
    /// elimination or a leaf, shifting towards leaves as depth runs out.
    fn pick(&mut self, leaves: &[Choice], elims: &[Choice], controls: &[Choice], depth: u32) -> Option<Choice> {
        let deep = depth > 1;
        let (elims, controls) = if deep { (elims, controls) } else { (&[][..], &[][..]) };
        if !controls.is_empty() && self.rng.gen_bool(self.cfg.control_prob.clamp(0.0, 1.0)) {
            return controls.choose(&mut self.rng).copied();
        }
        let p_elim = 0.3 + 0.4 * (depth as f64 / self.cfg.max_depth.max(1) as f64);
        if !elims.is_empty() && (leaves.is_empty() || self.rng.gen_bool(p_elim.min(1.0))) {
            return elims.choose(&mut self.rng).copied();
        }
        if let Some(c) = leaves.choose(&mut self.rng) {
            return Some(*c);
        }
        elims.iter().chain(controls).copied().collect::<Vec<_>>().choose(&mut self.rng).copied()
    }

    fn with_var<T>(&mut self, x: Name, ty: Type, f: impl FnOnce(&mut Self) -> Option<T>) -> Option<T> {
        self.gamma.push((x, ty));
        let r = f(self);
        self.gamma.pop();
        r
    }

    fn with_cont<T>(&mut self, k: Name, c: ContType, f: impl FnOnce(&mut Self) -> Option<T>) -> Option<T> {
        self.delta.push((k, c));
        let r = f(self);
        self.delta.pop();
        r
    }

    // ---- abortive ----

    fn abort(&mut self, goal: &Type, depth: u32) -> Option<Term> {
        for _ in 0..BACKTRACK_BUDGET {
            if !self.budget_left() {
                return None;
            }
            let mut leaves: Vec<Choice> = self
                .gamma
                .iter()
                .enumerate()
                .filter(|(_, (_, t))| alpha_eq_type(t, goal))
                .map(|(i, _)| Choice::Var(i))
                .collect();
            if matches!(goal, Type::Arrow(..) | Type::Forall(..)) {
                leaves.push(Choice::Intro);
            }
            let elims = [Choice::App, Choice::TyApp, Choice::PolyApp];
            let mut controls = vec![Choice::Callcc];
            controls.extend((0..self.delta.len()).map(Choice::Throw));
            let controls = if self.control_allowed() { controls } else { Vec::new() };
            let choice = self.pick(&leaves, &elims, &controls, depth)?;
            if let Some(t) = self.abort_rule(choice, goal, depth) {
                return Some(t);
            }
        }
        None
    }

    fn abort_rule(&mut self, choice: Choice, goal: &Type, depth: u32) -> Option<Term> {
        let d = depth - 1;
        match choice {
            Choice::Var(i) => Some(Term::Var(self.gamma[i].0.clone())),
            Choice::Intro => match goal {
                Type::Arrow(a, b) => {
                    let x = self.fresh("x");
                    let body = self.with_var(x.clone(), (**a).clone(), |g| g.abort(b, depth))?;
                    Some(Term::lam(x.as_str(), (**a).clone(), body))
                }
                Type::Forall(a, s) => {
                    let a2 = self.fresh("a");
                    let s2 = subst_type(s, a, &Type::Var(a2.clone()));
                    let body = self.abort(&s2, depth)?;
                    Some(Term::TyLam(a2, Box::new(body)))
                }
                _ => None,
            },
            Choice::App => {
                let a = self.arg_type();
                let f = self.abort(&Type::arrow(a.clone(), goal.clone()), d)?;
                let x = self.abort(&a, d)?;
                Some(Term::app(f, x))
            }
            Choice::TyApp => {
                let a = self.fresh("a");
                let body = self.abort(goal, d)?;
                let v = self.leaf();
                Some(Term::ty_app(Term::TyLam(a, Box::new(body)), v))
            }
            Choice::PolyApp => {
                let f = self.abort(&type_u(), d)?;
                let x = self.abort(goal, d)?;
                Some(Term::app(Term::ty_app(f, goal.clone()), x))
            }
            Choice::Callcc => {
                let k = self.fresh("k");
                let c = ContType::Abort(goal.clone());
                let body = self.with_cont(k.clone(), c.clone(), |g| g.abort(goal, d))?;
                Some(Term::Callcc(k, c, Box::new(body)))
            }
            Choice::Throw(i) => {
                let (k, c) = self.delta[i].clone();
                let body = self.abort(&c.hole().clone(), d)?;
                Some(Term::Throw(k, Some(goal.clone()), Box::new(body)))
            }
            Choice::Shift | Choice::Reset => None,
        }
    }

    // ---- delimited ----

    /// An answer type: usually `keep`, and always `keep` near the leaves,
    /// where a differing answer type could not be discharged.
    fn answer(&mut self, keep: &Type, depth: u32) -> Type {
        if depth <= 2 || self.rng.gen_bool(0.6) {
            keep.clone()
        } else {
            self.leaf()
        }
    }

    fn delim(&mut self, goal: &Goal, depth: u32) -> Option<Term> {
        let cbn = self.cfg.mode.is_cbn();
        for _ in 0..BACKTRACK_BUDGET {
            if !self.budget_left() {
                return None;
            }
            let pure = goal.pure();
            let mut leaves: Vec<Choice> = Vec::new();
            for (i, (_, t)) in self.gamma.iter().enumerate() {
                let ok = match t {
                    Type::Comp(s, r, u) if cbn => {
                        alpha_eq_type(s, &goal.s) && alpha_eq_type(r, &goal.t) && alpha_eq_type(u, &goal.u)
                    }
                    t if !cbn => pure && alpha_eq_type(t, &goal.s),
                    _ => false,
                };
                if ok {
                    leaves.push(Choice::Var(i));
                }
            }
            if pure && matches!(goal.s, Type::ArrowD(..) | Type::ForallD(..)) {
                leaves.push(Choice::Intro);
            }
            let elims = [Choice::App, Choice::TyApp];
            let mut controls = Vec::new();
            if self.control_allowed() {
                controls.push(Choice::Shift);
                if pure {
                    controls.push(Choice::Reset);
                }
                for (i, (_, c)) in self.delta.iter().enumerate() {
                    if let ContType::Delim(_, r) = c {
                        if (!cbn && alpha_eq_type(r, &goal.s)) || (cbn && pure) {
                            controls.push(Choice::Throw(i));
                        }
                    }
                }
            }
            // Shift discharges any effect in one node; prefer it for impure
            // goals before depth runs out.
            let urgent = !pure && depth > 1 && self.control_allowed() && (depth <= 3 || self.rng.gen_bool(0.5));
            let choice = if urgent { Choice::Shift } else { self.pick(&leaves, &elims, &controls, depth)? };
            if let Some(t) = self.delim_rule(choice, goal, depth) {
                return Some(t);
            }
        }
        None
    }

    fn delim_rule(&mut self, choice: Choice, goal: &Goal, depth: u32) -> Option<Term> {
        let cbn = self.cfg.mode.is_cbn();
        let d = depth - 1;
        match choice {
            Choice::Var(i) => Some(Term::Var(self.gamma[i].0.clone())),
            Choice::Intro => match &goal.s {
                Type::ArrowD(a, b, c, e) => {
                    let x = self.fresh("x");
                    let g2 = Goal::new((**b).clone(), (**c).clone(), (**e).clone());
                    let body = self.with_var(x.clone(), (**a).clone(), |g| g.delim(&g2, depth))?;
                    Some(Term::lam(x.as_str(), (**a).clone(), body))
                }
                Type::ForallD(a, s, r, u) => {
                    let a2 = self.fresh("a");
                    let v = Type::Var(a2.clone());
                    let g2 = Goal::new(subst_type(s, a, &v), subst_type(r, a, &v), subst_type(u, a, &v));
                    let body = self.delim(&g2, depth)?;
                    Some(Term::TyLam(a2, Box::new(body)))
                }
                _ => None,
            },
            Choice::App => {
                let arg = self.arg_type();
                let effects = self.control_allowed();
                if cbn {
                    // t0 : ({A,B,C} -> S @ [T, X], X, U),  t1 : (A, B, C)
                    let b = if effects { self.answer(&goal.u, d) } else { goal.u.clone() };
                    let c = if effects { self.answer(&b, d) } else { b.clone() };
                    let x = if effects { self.answer(&goal.u, d) } else { goal.u.clone() };
                    let fty = Type::arrow_d(Type::comp(arg.clone(), b.clone(), c.clone()), goal.s.clone(), goal.t.clone(), x.clone());
                    let f = self.delim(&Goal::new(fty, x, goal.u.clone()), d)?;
                    let e = self.delim(&Goal::new(arg, b, c), d)?;
                    Some(Term::app(f, e))
                } else {
                    // t0 : (A -> S @ [T, W], X, U),  t1 : (A, W, X)
                    let x = if effects { self.answer(&goal.u, d) } else { goal.u.clone() };
                    let w = if effects { self.answer(&x, d) } else { x.clone() };
                    let fty = Type::arrow_d(arg.clone(), goal.s.clone(), goal.t.clone(), w.clone());
                    let f = self.delim(&Goal::new(fty, x.clone(), goal.u.clone()), d)?;
                    let e = self.delim(&Goal::new(arg, w, x), d)?;
                    Some(Term::app(f, e))
                }
            }
            Choice::TyApp => {
                let a = self.fresh("a");
                let body = self.delim(goal, d)?;
                let v = self.leaf();
                Some(Term::ty_app(Term::TyLam(a, Box::new(body)), v))
            }
            Choice::Reset => {
                let v = self.leaf();
                let body = self.delim(&Goal::new(v.clone(), v, goal.s.clone()), d)?;
                Some(Term::reset(body))
            }
            Choice::Shift => {
                let k = self.fresh("k");
                let c = ContType::Delim(goal.s.clone(), goal.t.clone());
                let v = self.answer(&goal.u, d);
                let g2 = Goal::new(v.clone(), v, goal.u.clone());
                let body = self.with_cont(k.clone(), c.clone(), |g| g.delim(&g2, d))?;
                Some(Term::Shift(k, c, Box::new(body)))
            }
            Choice::Throw(i) => {
                let (k, c) = self.delta[i].clone();
                let ContType::Delim(a, r) = c else { return None };
                let g2 = if cbn {
                    // t : (A, R, S)  ⟹  (S, X, X)
                    Goal::new(a, r, goal.s.clone())
                } else {
                    // t : (A, T, U)  ⟹  (R, T, U)
                    Goal::new(a, goal.t.clone(), goal.u.clone())
                };
                let body = self.delim(&g2, d)?;
                Some(Term::Throw(k, None, Box::new(body)))
            }
            Choice::Callcc | Choice::PolyApp => None,
        }
    }
}
