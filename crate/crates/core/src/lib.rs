//! System F with abortive (callcc/throw) and delimited (shift/reset) control
//! operators, under call-by-value and call-by-name.

pub mod alpha;
pub mod harness;
pub mod typing;
pub mod machine;
pub mod reduction;
pub mod surface;
pub mod subst;
pub mod syntax;

pub use syntax::{CalcMode, Calculus, ContType, EvalContext, Frame, Metacontext, Name, Strategy, Term, Type};
