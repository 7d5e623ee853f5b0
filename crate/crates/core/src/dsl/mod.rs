//! The script language: single-assignment bindings over the matrix kernel.

mod ast;
mod lexer;
mod parser;
mod typecheck;

pub use ast::{BinOp, Binding, CmpOp, Expr, Literal, Predicate, ScalarExpr, Script};
pub use parser::parse;
pub use typecheck::{predicate_table, scalar_tables, type_of, typecheck, MatrixType, TypeError, Typed};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("line {line}: `{name}` is bound twice")]
    DuplicateBinding { name: String, line: usize },
    #[error("line {line}, column {col}: `{name}` is used before it is bound")]
    UnboundVariable { name: String, line: usize, col: usize },
}
