//! Spreadsheet formulas over a single CSV-backed sheet.
//!
//! Precedence, tightest first: `%` (postfix), `^` (right associative), unary
//! `-`/`+`, `*` `/`, `+` `-`, `&`, comparisons. So `=-2^2` is `-4`, and
//! `=1/1/80` is `(1/1)/80`. Slash-separated dates are never read as dates.

mod address;
mod ast;
mod eval;
mod lexer;
mod parser;
mod sheet;
mod value;

pub use address::{CellAddr, CellRange};
pub use ast::{BinaryOp, FormulaNode, UnaryOp};
pub use eval::{evaluate, FUNCTIONS};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, MAX_DEPTH, MAX_FORMULA_LEN};
pub use sheet::{load_workbook, CellContent, Sheet, MAX_CELLS};
pub use value::{CellError, CellValue, ErrorKind};

use thiserror::Error;

/// A lexing or parsing failure; `position` is the character offset in the
/// formula text (the leading `=` is offset 0).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at column {position}: {message}")]
pub struct ParseError {
    pub message: String,
    pub position: usize,
}

impl ParseError {
    pub(crate) fn new(message: impl Into<String>, position: usize) -> Self {
        Self {
            message: message.into(),
            position,
        }
    }
}
