//! Navigation programs: a small call/bind/repeat language over the high-level function
//! library, its parser, printer and interpreter, template attribute extraction, and the
//! optional out-of-process translator.

pub mod ast;
pub mod attrs;
pub mod interp;
pub mod parser;
pub mod printer;
pub mod translator;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ast::{Call, Expr, Function, IndexExpr, Program, Stmt};
pub use attrs::{extract_attributes, AttrTuple, Extraction};
pub use interp::{interpret, LogEntry, Value};
pub use parser::parse_program;
pub use printer::pretty_print;
pub use translator::{external_translate, fallback_program, Translation, TranslatorConfig};

/// 1-based line and column of a source position, plus its byte range.
///
/// Equality ignores the position so that ASTs compare structurally.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub start: usize,
    pub end: usize,
}

impl PartialEq for SourceSpan {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected {found}, expected {expected}")]
    Unexpected { expected: String, found: String },
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("{function} takes {expected} argument(s), got {found}")]
    Arity {
        function: String,
        expected: String,
        found: usize,
    },
    #[error("malformed literal: {0}")]
    MalformedLiteral(String),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{span}: {kind}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
}
