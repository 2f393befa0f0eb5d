use std::sync::Arc;
use super::lexer::{lex, Tok, Token};
use super::{ParseError, SourceError, HOLE};
use crate::syntax::{CalcMode, ContType, EvalContext, Frame, MetaType, ModeError, Name, Term, Type};

pub(super) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Accept `^[ ... ]` and `[]`; only trace files contain them.
    reified: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub(super) fn new(src: &str, first_line: usize, reified: bool) -> PResult<Self> {
        Ok(Parser { toks: lex(src, first_line)?, pos: 0, reified })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::new(t.line, t.col, msg)
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Name::new(&s))
            }
            other => Err(self.err(format!("expected an identifier, found {other}"))),
        }
    }

    pub(super) fn finish(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.err(format!("unexpected {} after end of term", self.peek())))
        }
    }

    /// A complete term; rejects stray holes.
    pub(super) fn top_term(&mut self) -> PResult<Term> {
        let start = self.pos;
        let t = self.term()?;
        if t.free_vars().terms.contains(&Name::new(HOLE)) {
            let tk = &self.toks[start];
            return Err(ParseError::new(tk.line, tk.col, "`[]` may only appear as the hole of a context frame"));
        }
        Ok(t)
    }

    pub(super) fn term(&mut self) -> PResult<Term> {
        match self.peek() {
            Tok::Fun => {
                self.bump();
                self.expect(Tok::LParen)?;
                let x = self.ident()?;
                self.expect(Tok::Colon)?;
                let ann = self.ty()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Arrow)?;
                Ok(Term::Lam(x, ann, Box::new(self.term()?)))
            }
            Tok::TFun => {
                self.bump();
                let a = self.ident()?;
                self.expect(Tok::Arrow)?;
                Ok(Term::TyLam(a, Box::new(self.term()?)))
            }
            Tok::Callcc | Tok::Shift => {
                let is_callcc = self.bump() == Tok::Callcc;
                self.expect(Tok::LParen)?;
                let k = self.ident()?;
                self.expect(Tok::Colon)?;
                let ann = self.cont_type()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Arrow)?;
                let body = Box::new(self.term()?);
                Ok(if is_callcc { Term::Callcc(k, ann, body) } else { Term::Shift(k, ann, body) })
            }
            Tok::Reset => {
                self.bump();
                Ok(Term::Reset(Box::new(self.term()?)))
            }
            Tok::Throw => {
                self.bump();
                let ann = if *self.peek() == Tok::LBrack {
                    self.bump();
                    let t = self.ty()?;
                    self.expect(Tok::RBrack)?;
                    Some(t)
                } else {
                    None
                };
                if *self.peek() == Tok::CtxOpen {
                    if !self.reified {
                        return Err(self.err("reified contexts are not allowed in source programs"));
                    }
                    let e = self.context()?;
                    Ok(Term::ThrowCtx(e, ann, Box::new(self.term()?)))
                } else {
                    let k = self.ident()?;
                    Ok(Term::Throw(k, ann, Box::new(self.term()?)))
                }
            }
            _ => self.app(),
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(_) | Tok::LParen => true,
            Tok::LBrack => self.reified && *self.peek2() == Tok::RBrack,
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<Term> {
        let mut head = self.atom()?;
        loop {
            if *self.peek() == Tok::LBrack && !(self.reified && *self.peek2() == Tok::RBrack) {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RBrack)?;
                head = Term::TyApp(Box::new(head), t);
            } else if self.starts_atom() {
                let a = self.atom()?;
                head = Term::App(Box::new(head), Box::new(a));
            } else {
                return Ok(head);
            }
        }
    }

    fn atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(Term::Var(Name::new(&x)))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBrack if self.reified && *self.peek2() == Tok::RBrack => {
                self.bump();
                self.bump();
                Ok(Term::Var(Name::new(HOLE)))
            }
            other => Err(self.err(format!("expected a term, found {other}"))),
        }
    }

    /// `^[ frame; ...; frame ]`, innermost frame first.
    pub(super) fn context(&mut self) -> PResult<EvalContext> {
        self.expect(Tok::CtxOpen)?;
        let mut frames = Vec::new();
        if *self.peek() != Tok::RBrack {
            loop {
                frames.push(self.frame()?);
                if *self.peek() == Tok::Semi {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrack)?;
        Ok(EvalContext::from_inner_first(frames))
    }

    fn frame(&mut self) -> PResult<Frame> {
        let start = self.pos;
        let t = self.term()?;
        let hole = Name::new(HOLE);
        let is_hole = |t: &Term| matches!(t, Term::Var(x) if *x == hole);
        let no_hole = |t: &Term| !t.free_vars().terms.contains(&hole);
        let frame = match t {
            Term::App(f, a) if is_hole(&f) && no_hole(&a) => Some(Frame::Arg(*a)),
            Term::App(f, a) if is_hole(&a) => match *f {
                Term::Lam(param, ann, body) if no_hole(&body) => Some(Frame::Fun { param, ann, body }),
                _ => None,
            },
            Term::TyApp(f, ty) if is_hole(&f) => Some(Frame::TyArg(ty)),
            Term::ThrowCtx(e, ann, b) if is_hole(&b) => Some(Frame::Throw(e, ann)),
            _ => None,
        };
        frame.ok_or_else(|| {
            let tk = &self.toks[start];
            ParseError::new(tk.line, tk.col, "not a context frame")
        })
    }

    pub(super) fn ty(&mut self) -> PResult<Type> {
        if *self.peek() == Tok::Forall {
            self.bump();
            let a = self.ident()?;
            self.expect(Tok::Dot)?;
            let body = self.ty()?;
            if let Some((t, u)) = self.answer_clause()? {
                return Ok(Type::ForallD(a, Arc::new(body), Arc::new(t), Arc::new(u)));
            }
            return Ok(Type::Forall(a, Arc::new(body)));
        }
        let lhs = self.ty_atom()?;
        if *self.peek() != Tok::Arrow {
            return Ok(lhs);
        }
        self.bump();
        let rhs = self.ty()?;
        if let Some((u, v)) = self.answer_clause()? {
            return Ok(Type::ArrowD(Arc::new(lhs), Arc::new(rhs), Arc::new(u), Arc::new(v)));
        }
        Ok(Type::Arrow(Arc::new(lhs), Arc::new(rhs)))
    }

    /// Optional `@ [U, V]`.
    fn answer_clause(&mut self) -> PResult<Option<(Type, Type)>> {
        if *self.peek() != Tok::At {
            return Ok(None);
        }
        self.bump();
        self.expect(Tok::LBrack)?;
        let u = self.ty()?;
        self.expect(Tok::Comma)?;
        let v = self.ty()?;
        self.expect(Tok::RBrack)?;
        Ok(Some((u, v)))
    }

    fn ty_atom(&mut self) -> PResult<Type> {
        match self.peek().clone() {
            Tok::Ident(a) => {
                self.bump();
                Ok(Type::Var(Name::new(&a)))
            }
            Tok::Meta(n) => {
                self.bump();
                Ok(Type::Meta(n))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBrace => {
                self.bump();
                let s = self.ty()?;
                self.expect(Tok::Comma)?;
                let t = self.ty()?;
                self.expect(Tok::Comma)?;
                let u = self.ty()?;
                self.expect(Tok::RBrace)?;
                Ok(Type::comp(s, t, u))
            }
            other => Err(self.err(format!("expected a type, found {other}"))),
        }
    }

    /// `T cont`, `(S, T) cont` or `S cont T`.
    pub(super) fn cont_type(&mut self) -> PResult<ContType> {
        if *self.peek() == Tok::LParen {
            let save = self.pos;
            self.bump();
            if let Ok(s) = self.ty() {
                if *self.peek() == Tok::Comma {
                    self.bump();
                    let t = self.ty()?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Cont)?;
                    return Ok(ContType::Delim(s, t));
                }
            }
            self.pos = save;
        }
        let s = self.ty()?;
        self.expect(Tok::Cont)?;
        if matches!(self.peek(), Tok::RParen | Tok::Eof) {
            Ok(ContType::Abort(s))
        } else {
            Ok(ContType::Delim(s, self.ty()?))
        }
    }

    pub(super) fn meta_type(&mut self) -> PResult<MetaType> {
        self.expect(Tok::Not)?;
        Ok(MetaType(self.ty()?))
    }
}

/// Reject constructs that do not belong to `mode`. Types are left to the
/// typecheckers so that annotations of the wrong calculus report as type errors.
pub(super) fn check_constructs(t: &Term, mode: CalcMode) -> Result<(), ModeError> {
    let bad = |what: &str| Err(ModeError { construct: what.to_string(), mode });
    match t {
        Term::Var(_) => Ok(()),
        Term::Lam(_, _, b) | Term::TyLam(_, b) | Term::TyApp(b, _) => check_constructs(b, mode),
        Term::App(f, a) => {
            check_constructs(f, mode)?;
            check_constructs(a, mode)
        }
        Term::Callcc(_, _, b) => {
            if mode.is_delimited() {
                return bad("callcc");
            }
            check_constructs(b, mode)
        }
        Term::Shift(_, _, b) => {
            if !mode.is_delimited() {
                return bad("shift");
            }
            check_constructs(b, mode)
        }
        Term::Reset(b) => {
            if !mode.is_delimited() {
                return bad("reset");
            }
            check_constructs(b, mode)
        }
        Term::Throw(_, ann, b) => {
            check_throw_ann(ann, mode)?;
            check_constructs(b, mode)
        }
        Term::ThrowCtx(e, ann, b) => {
            check_throw_ann(ann, mode)?;
            check_context_constructs(e, mode)?;
            check_constructs(b, mode)
        }
    }
}

fn check_throw_ann(ann: &Option<Type>, mode: CalcMode) -> Result<(), ModeError> {
    let what = match (ann.is_some(), mode.is_delimited()) {
        (false, false) => "throw without a result annotation",
        (true, true) => "throw with a result annotation",
        _ => return Ok(()),
    };
    Err(ModeError { construct: what.to_string(), mode })
}

fn check_context_constructs(e: &EvalContext, mode: CalcMode) -> Result<(), ModeError> {
    for f in e.frames_inner_first() {
        match f {
            Frame::Fun { body, .. } => check_constructs(body, mode)?,
            Frame::Arg(a) => check_constructs(a, mode)?,
            Frame::TyArg(_) => {}
            Frame::Throw(e0, ann) => {
                check_throw_ann(ann, mode)?;
                check_context_constructs(e0, mode)?;
            }
        }
    }
    Ok(())
}

/// Split off a `#mode <calculus> <strategy>` header, returning the mode (if
/// present), the rest of the text and the line on which it starts.
pub(super) fn split_header(text: &str) -> Result<(Option<CalcMode>, &str, usize), SourceError> {
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("--") {
            offset += line.len();
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("#mode") {
            let words: Vec<&str> = rest.split_whitespace().collect();
            let mode = match words.as_slice() {
                [c, s] => CalcMode::from_words(c, s),
                _ => None,
            }
            .ok_or_else(|| {
                SourceError::Parse(ParseError::new(i + 1, 1, "malformed header, expected `#mode <abortive|delimited> <cbv|cbn>`"))
            })?;
            return Ok((Some(mode), &text[offset + line.len()..], i + 2));
        }
        return Ok((None, text, 1));
    }
    Ok((None, text, 1))
}
