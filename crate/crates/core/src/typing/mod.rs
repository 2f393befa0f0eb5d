//! Typecheckers for the abortive and delimited calculi.

pub mod abortive;
pub mod delimited;

use std::fmt;

use thiserror::Error;

use crate::surface::{pretty, pretty_type};
use crate::syntax::{CalcMode, ContType, ModeError, Name, Term, Type};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypeErrorKind {
    UnboundVar,
    Mismatch,
    NotArrow,
    NotForall,
    FtvEscape,
    ModeViolation,
    OccursCheck,
    NotClosed,
    NotPlain,
    NotResetWrapped,
}

impl fmt::Display for TypeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TypeErrorKind::UnboundVar => "unbound variable",
            TypeErrorKind::Mismatch => "type mismatch",
            TypeErrorKind::NotArrow => "not a function type",
            TypeErrorKind::NotForall => "not a universal type",
            TypeErrorKind::FtvEscape => "type variable escapes",
            TypeErrorKind::ModeViolation => "mode violation",
            TypeErrorKind::OccursCheck => "occurs check",
            TypeErrorKind::NotClosed => "program not closed",
            TypeErrorKind::NotPlain => "program not plain",
            TypeErrorKind::NotResetWrapped => "program not wrapped in reset",
        };
        f.write_str(s)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub message: String,
    /// The offending subterm, pretty-printed and truncated.
    pub location: Option<String>,
    pub expected: Option<Box<Type>>,
    pub actual: Option<Box<Type>>,
}

const LOCATION_WIDTH: usize = 72;

impl TypeError {
    pub fn new(kind: TypeErrorKind, message: impl Into<String>) -> Self {
        TypeError { kind, message: message.into(), location: None, expected: None, actual: None }
    }

    pub fn at(mut self, t: &Term) -> Self {
        if self.location.is_none() {
            let mut s = pretty(t);
            if s.chars().count() > LOCATION_WIDTH {
                s = s.chars().take(LOCATION_WIDTH).collect::<String>() + "...";
            }
            self.location = Some(s);
        }
        self
    }

    pub fn mismatch(expected: &Type, actual: &Type) -> Self {
        TypeError {
            kind: TypeErrorKind::Mismatch,
            message: format!("expected `{}`, found `{}`", pretty_type(expected), pretty_type(actual)),
            location: None,
            expected: Some(Box::new(expected.clone())),
            actual: Some(Box::new(actual.clone())),
        }
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)?;
        if let Some(loc) = &self.location {
            write!(f, "\n  in `{loc}`")?;
        }
        Ok(())
    }
}

impl From<ModeError> for TypeError {
    fn from(e: ModeError) -> Self {
        TypeError::new(TypeErrorKind::ModeViolation, e.to_string())
    }
}

/// Term-variable environment; later bindings shadow earlier ones.
#[derive(Clone, Debug, Default)]
pub struct TypeEnvG(pub Vec<(Name, Type)>);

/// Continuation-variable environment; later bindings shadow earlier ones.
#[derive(Clone, Debug, Default)]
pub struct TypeEnvD(pub Vec<(Name, ContType)>);

impl TypeEnvG {
    pub fn lookup(&self, x: &Name) -> Option<&Type> {
        self.0.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn mentions_type_var(&self, a: &Name) -> bool {
        self.0.iter().any(|(_, t)| t.ftv().contains(a))
    }
}

impl TypeEnvD {
    pub fn lookup(&self, k: &Name) -> Option<&ContType> {
        self.0.iter().rev().find(|(j, _)| j == k).map(|(_, t)| t)
    }

    pub fn mentions_type_var(&self, a: &Name) -> bool {
        self.0.iter().any(|(_, c)| c.ftv().contains(a))
    }
}

/// Closed (no free term or continuation variables) and plain.
pub(crate) fn check_closed_plain(t: &Term) -> Result<(), TypeError> {
    let fv = t.free_vars();
    if let Some(x) = fv.terms.iter().next() {
        return Err(TypeError::new(TypeErrorKind::UnboundVar, format!("free variable `{x}` in program")).at(t));
    }
    if let Some(k) = fv.conts.iter().next() {
        return Err(TypeError::new(TypeErrorKind::NotClosed, format!("free continuation variable `{k}` in program")).at(t));
    }
    if !t.is_plain() {
        return Err(TypeError::new(TypeErrorKind::NotPlain, "reified contexts are not allowed in source programs").at(t));
    }
    Ok(())
}

/// Type a program of either calculus. For delimited programs the result is
/// the type of the outermost reset.
pub fn check_program(t: &Term, mode: CalcMode) -> Result<Type, TypeError> {
    if mode.is_delimited() {
        delimited::check_program_delim(t, mode)
    } else {
        abortive::check_program(t, mode)
    }
}
