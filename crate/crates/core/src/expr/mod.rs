//! Chart expression language.
//!
//! Component functions of the metric and the structure tensor are written as
//! small arithmetic expressions over the chart coordinates. This module parses
//! them into an [`Expression`] and evaluates them together with their exact
//! first and second partial derivatives as a [`Jet2`]. A central
//! finite-difference evaluator is provided as an independent oracle.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary } ;
//! unary    = "-" unary | power ;
//! power    = atom [ "^" exponent ] ;
//! exponent = [ "-" ] number | "(" [ "-" ] number ")" ;
//! atom     = number | constant | coordinate | function "(" expr ")" | "(" expr ")" ;
//! function = "sin" | "cos" | "tan" | "exp" | "ln" | "sqrt" | "tanh" ;
//! constant = "pi" | "e" ;
//! number   = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ]
//!          | "." digit { digit } [ exponent part ] ;
//! ```
//!
//! Exponents are restricted to numeric literals; write `exp(b*ln(a))` for a
//! general power.

mod ast;
mod fd;
mod jet;
mod parser;

pub use ast::{BinaryOp, Constant, Expression, Function, Node};
pub use fd::{finite_difference_jet2, finite_difference_jet2_with, FdSteps};
pub use jet::{evaluate_jet2, Jet2};
pub use parser::parse_expression;

use thiserror::Error;

/// Names that cannot be used as coordinates.
pub const RESERVED_WORDS: &[&str] = &["sin", "cos", "tan", "exp", "ln", "sqrt", "tanh", "pi", "e"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: expected one of {}", expected.join(", "))]
    Syntax {
        position: usize,
        expected: Vec<String>,
    },
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("exponent at byte {position} must be a numeric literal")]
    NonLiteralExponent { position: usize },
    #[error("invalid coordinate list: {0}")]
    InvalidCoordinates(String),
}

impl ParseError {
    /// Byte offset of the error in the source text, when there is one.
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::UnknownIdentifier { position, .. }
            | ParseError::NonLiteralExponent { position } => Some(*position),
            ParseError::InvalidCoordinates(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("non-finite result while evaluating {context}")]
    Overflow { context: &'static str },
    #[error("point has {got} coordinates, expression expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
}

/// Checks a coordinate list: nonempty, distinct, identifier-shaped, not reserved.
pub fn check_coordinates<S: AsRef<str>>(coords: &[S]) -> Result<(), ParseError> {
    if coords.is_empty() {
        return Err(ParseError::InvalidCoordinates("no coordinates declared".into()));
    }
    for (i, c) in coords.iter().enumerate() {
        let c = c.as_ref();
        let mut chars = c.chars();
        let ok_start = chars
            .next()
            .map(|ch| ch.is_ascii_alphabetic() || ch == '_')
            .unwrap_or(false);
        if !ok_start || !chars.all(|ch| ch.is_ascii_alphanumeric() || ch == '_') {
            return Err(ParseError::InvalidCoordinates(format!(
                "`{c}` is not an identifier"
            )));
        }
        if RESERVED_WORDS.contains(&c) {
            return Err(ParseError::InvalidCoordinates(format!(
                "`{c}` is a reserved word"
            )));
        }
        if coords[..i].iter().any(|p| p.as_ref() == c) {
            return Err(ParseError::InvalidCoordinates(format!(
                "`{c}` declared twice"
            )));
        }
    }
    Ok(())
}
