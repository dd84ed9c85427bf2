//! Truncated multivariate Taylor jets and a small expression language for
//! scalar fields on a four-coordinate chart.

mod expr;
#[allow(clippy::module_inception)]
mod jet;
mod parse;

pub use expr::{Chart, Expr, Func, ScalarField};
pub use jet::{coefficient_count, monomial, monomial_index, Exponents, Jet, MAX_ORDER, NVARS, TRIG_POLE_GUARD};
pub use parse::parse_expr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("pole in {function} at value {value:e}")]
    Pole { function: &'static str, value: f64 },
    #[error("{function} undefined at {value:e}")]
    Domain { function: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable `{name}` at offset {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("malformed power at offset {offset}: {message}")]
    MalformedPower { offset: usize, message: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownVariable { offset, .. }
            | ParseError::MalformedPower { offset, .. } => *offset,
        }
    }
}
