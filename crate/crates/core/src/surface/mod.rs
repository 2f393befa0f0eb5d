//! Concrete syntax: parsing, pretty-printing and trace serialization.
//!
//! Source files start with a header `#mode <abortive|delimited> <cbv|cbn>`
//! and contain one term. Comments run from `--` to the end of the line.

mod lexer;
mod parser;
mod pretty;
mod trace;

use thiserror::Error;

use crate::syntax::{CalcMode, ContType, EvalContext, MetaType, ModeError, Term, Type};
use parser::{check_constructs, split_header, Parser};

pub use lexer::is_keyword;
pub use trace::{decomposition_json, emit_trace, machine_record, trace_records, DecompositionJson, MachineRecord, TraceRecord};
pub use pretty::{
    pretty, pretty_cont_type, pretty_context, pretty_frame, pretty_judgment, pretty_meta_type, pretty_metacontext,
    pretty_reified, pretty_type,
};

/// Name of the pseudo-variable standing for a context's hole while parsing
/// and printing frames. It cannot be written as an identifier.
pub(crate) const HOLE: &str = "[]";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SourceError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error("no `#mode` header and no mode given")]
    MissingMode,
}

/// A parsed `.fctl` file.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub mode: CalcMode,
    pub term: Term,
}

/// Parse a source term (no header) for `mode`.
pub fn parse(text: &str, mode: CalcMode) -> Result<Term, SourceError> {
    parse_with(text, 1, mode, false)
}

/// Parse a term that may contain reified contexts, as printed in traces.
pub fn parse_trace_term(text: &str, mode: CalcMode) -> Result<Term, SourceError> {
    parse_with(text, 1, mode, true)
}

fn parse_with(text: &str, first_line: usize, mode: CalcMode, reified: bool) -> Result<Term, SourceError> {
    let mut p = Parser::new(text, first_line, reified)?;
    let t = p.top_term()?;
    p.finish()?;
    check_constructs(&t, mode)?;
    Ok(t)
}

/// Parse a whole file. The header decides the mode; `fallback` is used when
/// there is none.
pub fn parse_source(text: &str, fallback: Option<CalcMode>) -> Result<SourceFile, SourceError> {
    let (header, body, first_line) = split_header(text)?;
    let mode = header.or(fallback).ok_or(SourceError::MissingMode)?;
    let term = parse_with(body, first_line, mode, false)?;
    Ok(SourceFile { mode, term })
}

/// Parse a whole file in `mode`, ignoring any header it has.
pub fn parse_source_as(text: &str, mode: CalcMode) -> Result<SourceFile, SourceError> {
    let (_, body, first_line) = split_header(text)?;
    let term = parse_with(body, first_line, mode, false)?;
    Ok(SourceFile { mode, term })
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(text, 1, false)?;
    let t = p.ty()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_cont_type(text: &str) -> Result<ContType, ParseError> {
    let mut p = Parser::new(text, 1, false)?;
    let t = p.cont_type()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_meta_type(text: &str) -> Result<MetaType, ParseError> {
    let mut p = Parser::new(text, 1, false)?;
    let t = p.meta_type()?;
    p.finish()?;
    Ok(t)
}

/// Parse a reified context `^[ ... ]`.
pub fn parse_context(text: &str) -> Result<EvalContext, ParseError> {
    let mut p = Parser::new(text, 1, true)?;
    let e = p.context()?;
    p.finish()?;
    Ok(e)
}

/// Render a program with a header so that it can be read back by [`parse_source`].
pub fn render_source(mode: CalcMode, t: &Term) -> String {
    format!("#mode {mode}\n{}\n", pretty(t))
}
