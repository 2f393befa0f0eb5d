//! Abstract syntax shared by the four calculi.
//!
//! One [`Term`] type covers both the abortive calculus (callcc/throw) and the
//! delimited calculus (shift/reset/throw). Which constructs are legal is
//! decided by a [`CalcMode`] carried alongside the tree, see [`validate`].

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

/// An identifier. Term, type and continuation variables share this
/// representation; their namespaces are told apart by position.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Part of the name before any freshening suffix.
    pub fn base(&self) -> &str {
        match self.0.find('\'') {
            Some(i) if i > 0 => &self.0[..i],
            _ => &self.0,
        }
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

static FRESH: AtomicU64 = AtomicU64::new(0);

/// A name that has never been produced before by this process and that is
/// not in `avoid`. Fresh names look like `x'17`, which the parser accepts.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem = match base.find('\'') {
        Some(i) if i > 0 => &base[..i],
        _ => base,
    };
    loop {
        let n = FRESH.fetch_add(1, Ordering::Relaxed);
        let cand = Name::new(&format!("{stem}'{n}"));
        if !avoid.contains(&cand) {
            return cand;
        }
    }
}

/// Term types of both calculi.
///
/// `Var`, `Arrow` and `Forall` belong to the abortive calculus. `ArrowD` and
/// `ForallD` carry the extra answer-type annotations of the delimited
/// calculus; `Comp` is a call-by-name computation triple and only occurs as
/// the parameter of an `ArrowD` (or a λ annotation). `Meta` is an answer-type
/// metavariable produced by the delimited checker and never appears in source.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Type {
    Var(Name),
    Arrow(Arc<Type>, Arc<Type>),
    Forall(Name, Arc<Type>),
    /// `S -> T @ [U, V]`: argument, result, answer of the calling context,
    /// answer of the calling metacontext.
    ArrowD(Arc<Type>, Arc<Type>, Arc<Type>, Arc<Type>),
    /// `forall a. S @ [T, U]`.
    ForallD(Name, Arc<Type>, Arc<Type>, Arc<Type>),
    /// `{S, T, U}`.
    Comp(Arc<Type>, Arc<Type>, Arc<Type>),
    Meta(u32),
}

impl Type {
    pub fn var(a: &str) -> Type {
        Type::Var(Name::new(a))
    }

    pub fn arrow(s: Type, t: Type) -> Type {
        Type::Arrow(Arc::new(s), Arc::new(t))
    }

    pub fn forall(a: &str, s: Type) -> Type {
        Type::Forall(Name::new(a), Arc::new(s))
    }

    pub fn arrow_d(s: Type, t: Type, u: Type, v: Type) -> Type {
        Type::ArrowD(Arc::new(s), Arc::new(t), Arc::new(u), Arc::new(v))
    }

    pub fn forall_d(a: &str, s: Type, t: Type, u: Type) -> Type {
        Type::ForallD(Name::new(a), Arc::new(s), Arc::new(t), Arc::new(u))
    }

    pub fn comp(s: Type, t: Type, u: Type) -> Type {
        Type::Comp(Arc::new(s), Arc::new(t), Arc::new(u))
    }

    /// Free type variables.
    pub fn ftv(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_ftv(&mut Vec::new(), &mut out);
        out
    }

    pub(crate) fn collect_ftv(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Type::Var(a) => {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
            Type::Arrow(s, t) => {
                s.collect_ftv(bound, out);
                t.collect_ftv(bound, out);
            }
            Type::Forall(a, s) => {
                bound.push(a.clone());
                s.collect_ftv(bound, out);
                bound.pop();
            }
            Type::ArrowD(s, t, u, v) => {
                for x in [s, t, u, v] {
                    x.collect_ftv(bound, out);
                }
            }
            Type::ForallD(a, s, t, u) => {
                bound.push(a.clone());
                for x in [s, t, u] {
                    x.collect_ftv(bound, out);
                }
                bound.pop();
            }
            Type::Comp(s, t, u) => {
                for x in [s, t, u] {
                    x.collect_ftv(bound, out);
                }
            }
            Type::Meta(_) => {}
        }
    }

    pub fn has_meta(&self) -> bool {
        match self {
            Type::Meta(_) => true,
            Type::Var(_) => false,
            Type::Arrow(s, t) => s.has_meta() || t.has_meta(),
            Type::Forall(_, s) => s.has_meta(),
            Type::ArrowD(s, t, u, v) => [s, t, u, v].iter().any(|x| x.has_meta()),
            Type::ForallD(_, s, t, u) | Type::Comp(s, t, u) => {
                [s, t, u].iter().any(|x| x.has_meta())
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Type::Var(_) | Type::Meta(_) => 1,
            Type::Arrow(s, t) => 1 + s.size() + t.size(),
            Type::Forall(_, s) => 1 + s.size(),
            Type::ArrowD(s, t, u, v) => 1 + s.size() + t.size() + u.size() + v.size(),
            Type::ForallD(_, s, t, u) | Type::Comp(s, t, u) => 1 + s.size() + t.size() + u.size(),
        }
    }
}

/// Types of evaluation contexts: `S cont` (abortive) or `(S, T) cont`
/// (delimited: hole type and answer type).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ContType {
    Abort(Type),
    Delim(Type, Type),
}

impl ContType {
    pub fn ftv(&self) -> BTreeSet<Name> {
        match self {
            ContType::Abort(s) => s.ftv(),
            ContType::Delim(s, t) => {
                let mut out = s.ftv();
                out.extend(t.ftv());
                out
            }
        }
    }

    pub fn hole(&self) -> &Type {
        match self {
            ContType::Abort(s) | ContType::Delim(s, _) => s,
        }
    }
}

/// Type of a metacontext, `not S`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MetaType(pub Type);

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(Name),
    Lam(Name, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    TyLam(Name, Box<Term>),
    TyApp(Box<Term>, Type),
    Callcc(Name, ContType, Box<Term>),
    Shift(Name, ContType, Box<Term>),
    Reset(Box<Term>),
    /// Throw to a continuation variable. The annotation is the result type
    /// in the abortive calculus and absent in the delimited one.
    Throw(Name, Option<Type>, Box<Term>),
    /// Throw to a reified context. Only created during evaluation.
    ThrowCtx(EvalContext, Option<Type>, Box<Term>),
}

impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(Name::new(x))
    }

    pub fn lam(x: &str, ann: Type, body: Term) -> Term {
        Term::Lam(Name::new(x), ann, Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn ty_lam(a: &str, body: Term) -> Term {
        Term::TyLam(Name::new(a), Box::new(body))
    }

    pub fn ty_app(t: Term, ty: Type) -> Term {
        Term::TyApp(Box::new(t), ty)
    }

    pub fn callcc(k: &str, ann: ContType, body: Term) -> Term {
        Term::Callcc(Name::new(k), ann, Box::new(body))
    }

    pub fn shift(k: &str, ann: ContType, body: Term) -> Term {
        Term::Shift(Name::new(k), ann, Box::new(body))
    }

    pub fn reset(t: Term) -> Term {
        Term::Reset(Box::new(t))
    }

    pub fn throw(k: &str, ann: Option<Type>, t: Term) -> Term {
        Term::Throw(Name::new(k), ann, Box::new(t))
    }

    pub fn throw_ctx(e: EvalContext, ann: Option<Type>, t: Term) -> Term {
        Term::ThrowCtx(e, ann, Box::new(t))
    }

    /// Values are λ- and Λ-abstractions. `Reset(v)` is a program value, not a value.
    pub fn is_value(&self) -> bool {
        matches!(self, Term::Lam(..) | Term::TyLam(..))
    }

    /// No reified-context throw anywhere in the term.
    pub fn is_plain(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Lam(_, _, b) | Term::TyLam(_, b) | Term::Callcc(_, _, b) | Term::Shift(_, _, b) => {
                b.is_plain()
            }
            Term::Reset(b) | Term::TyApp(b, _) | Term::Throw(_, _, b) => b.is_plain(),
            Term::App(f, a) => f.is_plain() && a.is_plain(),
            Term::ThrowCtx(..) => false,
        }
    }

    pub fn free_vars(&self) -> FreeVars {
        let mut fv = FreeVars::default();
        self.collect_fv(&mut Bound::default(), &mut fv);
        fv
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    fn collect_fv(&self, b: &mut Bound, fv: &mut FreeVars) {
        match self {
            Term::Var(x) => {
                if !b.terms.contains(x) {
                    fv.terms.insert(x.clone());
                }
            }
            Term::Lam(x, ann, body) => {
                ann.collect_ftv(&mut b.types, &mut fv.types);
                b.terms.push(x.clone());
                body.collect_fv(b, fv);
                b.terms.pop();
            }
            Term::App(f, a) => {
                f.collect_fv(b, fv);
                a.collect_fv(b, fv);
            }
            Term::TyLam(a, body) => {
                b.types.push(a.clone());
                body.collect_fv(b, fv);
                b.types.pop();
            }
            Term::TyApp(t, ty) => {
                t.collect_fv(b, fv);
                ty.collect_ftv(&mut b.types, &mut fv.types);
            }
            Term::Callcc(k, ann, body) | Term::Shift(k, ann, body) => {
                match ann {
                    ContType::Abort(s) => s.collect_ftv(&mut b.types, &mut fv.types),
                    ContType::Delim(s, t) => {
                        s.collect_ftv(&mut b.types, &mut fv.types);
                        t.collect_ftv(&mut b.types, &mut fv.types);
                    }
                }
                b.conts.push(k.clone());
                body.collect_fv(b, fv);
                b.conts.pop();
            }
            Term::Reset(t) => t.collect_fv(b, fv),
            Term::Throw(k, ann, t) => {
                if !b.conts.contains(k) {
                    fv.conts.insert(k.clone());
                }
                if let Some(ty) = ann {
                    ty.collect_ftv(&mut b.types, &mut fv.types);
                }
                t.collect_fv(b, fv);
            }
            Term::ThrowCtx(e, ann, t) => {
                e.collect_fv(b, fv);
                if let Some(ty) = ann {
                    ty.collect_ftv(&mut b.types, &mut fv.types);
                }
                t.collect_fv(b, fv);
            }
        }
    }

    /// Number of constructors, counting reified contexts.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Lam(_, _, b) | Term::TyLam(_, b) | Term::Callcc(_, _, b) | Term::Shift(_, _, b) => {
                1 + b.size()
            }
            Term::Reset(b) | Term::TyApp(b, _) | Term::Throw(_, _, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::ThrowCtx(e, _, t) => 1 + e.size() + t.size(),
        }
    }

    /// Height of the syntax tree.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Lam(_, _, b) | Term::TyLam(_, b) | Term::Callcc(_, _, b) | Term::Shift(_, _, b) => {
                1 + b.depth()
            }
            Term::Reset(b) | Term::TyApp(b, _) | Term::Throw(_, _, b) => 1 + b.depth(),
            Term::App(f, a) => 1 + f.depth().max(a.depth()),
            Term::ThrowCtx(_, _, t) => 1 + t.depth(),
        }
    }

    /// True if the term mentions callcc, shift, reset or any throw.
    pub fn has_control(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Callcc(..) | Term::Shift(..) | Term::Reset(_) | Term::Throw(..) | Term::ThrowCtx(..) => {
                true
            }
            Term::Lam(_, _, b) | Term::TyLam(_, b) | Term::TyApp(b, _) => b.has_control(),
            Term::App(f, a) => f.has_control() || a.has_control(),
        }
    }
}

#[derive(Default)]
struct Bound {
    terms: Vec<Name>,
    types: Vec<Name>,
    conts: Vec<Name>,
}

/// Free term, type and continuation variables of a term.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct FreeVars {
    pub terms: BTreeSet<Name>,
    pub types: BTreeSet<Name>,
    pub conts: BTreeSet<Name>,
}

impl FreeVars {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.types.is_empty() && self.conts.is_empty()
    }

    /// All three sets merged; used to pick names that clash with nothing.
    pub fn all(&self) -> BTreeSet<Name> {
        let mut out = self.terms.clone();
        out.extend(self.types.iter().cloned());
        out.extend(self.conts.iter().cloned());
        out
    }
}

/// One layer of an evaluation context.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Frame {
    /// `(λx:S.t) []`, call by value only.
    Fun { param: Name, ann: Type, body: Box<Term> },
    /// `[] t`.
    Arg(Term),
    /// `[] S`.
    TyArg(Type),
    /// `throw ↑E0 []`, call by value only. Carries the throw's result
    /// annotation so that plugging rebuilds the original term exactly.
    Throw(EvalContext, Option<Type>),
}

impl Frame {
    /// Rebuild the term this frame stands for, with `t` in the hole.
    pub fn wrap(&self, t: Term) -> Term {
        match self {
            Frame::Fun { param, ann, body } => Term::App(
                Box::new(Term::Lam(param.clone(), ann.clone(), body.clone())),
                Box::new(t),
            ),
            Frame::Arg(a) => Term::App(Box::new(t), Box::new(a.clone())),
            Frame::TyArg(ty) => Term::TyApp(Box::new(t), ty.clone()),
            Frame::Throw(e, ann) => Term::ThrowCtx(e.clone(), ann.clone(), Box::new(t)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Frame::Fun { body, .. } => 2 + body.size(),
            Frame::Arg(a) => 1 + a.size(),
            Frame::TyArg(_) => 1,
            Frame::Throw(e, _) => 1 + e.size(),
        }
    }
}

/// An evaluation context, a term with a hole, represented inside-out.
///
/// Frames are stored outermost-first so that the innermost frame sits at the
/// end of the vector; [`EvalContext::frames_inner_first`] walks them in the
/// innermost-first order of the grammar.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct EvalContext {
    frames: Vec<Frame>,
}

impl EvalContext {
    /// The empty context `[]`.
    pub fn hole() -> Self {
        EvalContext { frames: Vec::new() }
    }

    /// Build from frames listed innermost-first.
    pub fn from_inner_first(frames: Vec<Frame>) -> Self {
        let mut frames = frames;
        frames.reverse();
        EvalContext { frames }
    }

    pub fn is_hole(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Add a new innermost frame.
    pub fn push_inner(&mut self, f: Frame) {
        self.frames.push(f);
    }

    pub fn with_inner(mut self, f: Frame) -> Self {
        self.frames.push(f);
        self
    }

    /// Remove the innermost frame.
    pub fn pop_inner(&mut self) -> Option<Frame> {
        self.frames.pop()
    }

    pub fn innermost(&self) -> Option<&Frame> {
        self.frames.last()
    }

    pub fn frames_inner_first(&self) -> impl DoubleEndedIterator<Item = &Frame> + ExactSizeIterator {
        self.frames.iter().rev()
    }

    pub fn map_frames(&self, mut f: impl FnMut(&Frame) -> Frame) -> Self {
        EvalContext { frames: self.frames.iter().map(&mut f).collect() }
    }

    pub fn size(&self) -> usize {
        self.frames.iter().map(Frame::size).sum()
    }

    fn collect_fv(&self, b: &mut Bound, fv: &mut FreeVars) {
        for f in &self.frames {
            match f {
                Frame::Fun { param, ann, body } => {
                    ann.collect_ftv(&mut b.types, &mut fv.types);
                    b.terms.push(param.clone());
                    body.collect_fv(b, fv);
                    b.terms.pop();
                }
                Frame::Arg(a) => a.collect_fv(b, fv),
                Frame::TyArg(ty) => ty.collect_ftv(&mut b.types, &mut fv.types),
                Frame::Throw(e, ann) => {
                    e.collect_fv(b, fv);
                    if let Some(ty) = ann {
                        ty.collect_ftv(&mut b.types, &mut fv.types);
                    }
                }
            }
        }
    }

    pub fn free_vars(&self) -> FreeVars {
        let mut fv = FreeVars::default();
        self.collect_fv(&mut Bound::default(), &mut fv);
        fv
    }
}

/// A stack of evaluation contexts separated by resets. The empty stack is `•`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Metacontext {
    /// Bottom first; the last element is the top.
    stack: Vec<EvalContext>,
}

impl Metacontext {
    pub fn empty() -> Self {
        Metacontext { stack: Vec::new() }
    }

    /// Build from contexts listed top-first.
    pub fn from_top_first(contexts: Vec<EvalContext>) -> Self {
        let mut stack = contexts;
        stack.reverse();
        Metacontext { stack }
    }

    pub fn push(&mut self, e: EvalContext) {
        self.stack.push(e);
    }

    pub fn pop(&mut self) -> Option<EvalContext> {
        self.stack.pop()
    }

    pub fn is_empty(&self) -> bool {
        self.stack.is_empty()
    }

    pub fn len(&self) -> usize {
        self.stack.len()
    }

    pub fn top_first(&self) -> impl DoubleEndedIterator<Item = &EvalContext> + ExactSizeIterator {
        self.stack.iter().rev()
    }

    pub fn frame_count(&self) -> usize {
        self.stack.iter().map(EvalContext::len).sum()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calculus {
    Abortive,
    Delimited,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Cbv,
    Cbn,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize, serde::Deserialize)]
pub struct CalcMode {
    pub calculus: Calculus,
    pub strategy: Strategy,
}

impl CalcMode {
    pub const ABORTIVE_CBV: CalcMode = CalcMode { calculus: Calculus::Abortive, strategy: Strategy::Cbv };
    pub const ABORTIVE_CBN: CalcMode = CalcMode { calculus: Calculus::Abortive, strategy: Strategy::Cbn };
    pub const DELIMITED_CBV: CalcMode = CalcMode { calculus: Calculus::Delimited, strategy: Strategy::Cbv };
    pub const DELIMITED_CBN: CalcMode = CalcMode { calculus: Calculus::Delimited, strategy: Strategy::Cbn };

    pub const ALL: [CalcMode; 4] =
        [Self::ABORTIVE_CBV, Self::ABORTIVE_CBN, Self::DELIMITED_CBV, Self::DELIMITED_CBN];

    pub fn new(calculus: Calculus, strategy: Strategy) -> Self {
        CalcMode { calculus, strategy }
    }

    pub fn is_delimited(self) -> bool {
        self.calculus == Calculus::Delimited
    }

    pub fn is_cbn(self) -> bool {
        self.strategy == Strategy::Cbn
    }

    /// Parse the words of a mode header, e.g. `["abortive", "cbv"]`.
    pub fn from_words(calculus: &str, strategy: &str) -> Option<Self> {
        let c = match calculus {
            "abortive" => Calculus::Abortive,
            "delimited" => Calculus::Delimited,
            _ => return None,
        };
        let s = match strategy {
            "cbv" => Strategy::Cbv,
            "cbn" => Strategy::Cbn,
            _ => return None,
        };
        Some(CalcMode::new(c, s))
    }
}

impl fmt::Display for CalcMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.calculus {
            Calculus::Abortive => "abortive",
            Calculus::Delimited => "delimited",
        };
        let s = match self.strategy {
            Strategy::Cbv => "cbv",
            Strategy::Cbn => "cbn",
        };
        write!(f, "{c} {s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{construct} is not allowed in {mode} mode")]
pub struct ModeError {
    pub construct: String,
    pub mode: CalcMode,
}

/// Check that every construct, type and context frame in `t` belongs to `mode`.
pub fn validate(t: &Term, mode: CalcMode) -> Result<(), ModeError> {
    let err = |what: &str| Err(ModeError { construct: what.to_string(), mode });
    match t {
        Term::Var(_) => Ok(()),
        Term::Lam(_, ann, b) => {
            validate_param(ann, mode)?;
            validate(b, mode)
        }
        Term::App(f, a) => {
            validate(f, mode)?;
            validate(a, mode)
        }
        Term::TyLam(_, b) => validate(b, mode),
        Term::TyApp(b, ty) => {
            validate_type(ty, mode)?;
            validate(b, mode)
        }
        Term::Callcc(_, ann, b) => {
            if mode.is_delimited() {
                return err("callcc");
            }
            validate_cont_type(ann, mode)?;
            validate(b, mode)
        }
        Term::Shift(_, ann, b) => {
            if !mode.is_delimited() {
                return err("shift");
            }
            validate_cont_type(ann, mode)?;
            validate(b, mode)
        }
        Term::Reset(b) => {
            if !mode.is_delimited() {
                return err("reset");
            }
            validate(b, mode)
        }
        Term::Throw(_, ann, b) => {
            validate_throw_ann(ann, mode)?;
            validate(b, mode)
        }
        Term::ThrowCtx(e, ann, b) => {
            validate_throw_ann(ann, mode)?;
            validate_context(e, mode)?;
            validate(b, mode)
        }
    }
}

fn validate_throw_ann(ann: &Option<Type>, mode: CalcMode) -> Result<(), ModeError> {
    match (ann, mode.is_delimited()) {
        (Some(ty), false) => validate_type(ty, mode),
        (None, true) => Ok(()),
        (None, false) => Err(ModeError { construct: "throw without result annotation".into(), mode }),
        (Some(_), true) => Err(ModeError { construct: "throw with result annotation".into(), mode }),
    }
}

fn validate_param(ann: &Type, mode: CalcMode) -> Result<(), ModeError> {
    if mode == CalcMode::DELIMITED_CBN {
        match ann {
            Type::Comp(s, t, u) => {
                validate_type(s, mode)?;
                validate_type(t, mode)?;
                validate_type(u, mode)
            }
            _ => Err(ModeError { construct: "parameter type that is not a computation triple".into(), mode }),
        }
    } else {
        validate_type(ann, mode)
    }
}

pub fn validate_cont_type(c: &ContType, mode: CalcMode) -> Result<(), ModeError> {
    match (c, mode.is_delimited()) {
        (ContType::Abort(s), false) => validate_type(s, mode),
        (ContType::Delim(s, t), true) => {
            validate_type(s, mode)?;
            validate_type(t, mode)
        }
        (ContType::Abort(_), true) => Err(ModeError { construct: "context type `S cont`".into(), mode }),
        (ContType::Delim(..), false) => Err(ModeError { construct: "context type `(S, T) cont`".into(), mode }),
    }
}

/// Check a term type (not in parameter position) against the mode.
pub fn validate_type(ty: &Type, mode: CalcMode) -> Result<(), ModeError> {
    let err = |what: &str| Err(ModeError { construct: what.to_string(), mode });
    match ty {
        Type::Var(_) => Ok(()),
        Type::Meta(_) => err("answer-type metavariable"),
        Type::Comp(..) => err("computation triple outside parameter position"),
        Type::Arrow(s, t) => {
            if mode.is_delimited() {
                return err("arrow type without answer annotations");
            }
            validate_type(s, mode)?;
            validate_type(t, mode)
        }
        Type::Forall(_, s) => {
            if mode.is_delimited() {
                return err("forall type without answer annotations");
            }
            validate_type(s, mode)
        }
        Type::ArrowD(s, t, u, v) => {
            if !mode.is_delimited() {
                return err("annotated arrow type");
            }
            validate_param(s, mode)?;
            validate_type(t, mode)?;
            validate_type(u, mode)?;
            validate_type(v, mode)
        }
        Type::ForallD(_, s, t, u) => {
            if !mode.is_delimited() {
                return err("annotated forall type");
            }
            validate_type(s, mode)?;
            validate_type(t, mode)?;
            validate_type(u, mode)
        }
    }
}

pub fn validate_context(e: &EvalContext, mode: CalcMode) -> Result<(), ModeError> {
    for f in e.frames_inner_first() {
        match f {
            Frame::Fun { param, ann, body } => {
                if mode.is_cbn() {
                    return Err(ModeError { construct: "function frame in a call-by-name context".into(), mode });
                }
                let _ = param;
                validate_param(ann, mode)?;
                validate(body, mode)?;
            }
            Frame::Arg(a) => validate(a, mode)?,
            Frame::TyArg(ty) => validate_type(ty, mode)?,
            Frame::Throw(e0, ann) => {
                if mode.is_cbn() {
                    return Err(ModeError { construct: "throw frame in a call-by-name context".into(), mode });
                }
                validate_throw_ann(ann, mode)?;
                validate_context(e0, mode)?;
            }
        }
    }
    Ok(())
}
