//! Front end: lexing, parsing, plain types, let-normalization and cues.

pub mod ast;
pub mod cues;
pub mod lexer;
pub mod normalize;
pub mod parser;
pub mod print;
pub mod types;

pub use ast::*;
pub use parser::{parse, parse_expr};
pub use types::{infer_program, TypeError};

#[derive(Debug, Clone, thiserror::Error)]
#[error("{span}: syntax error: {msg}")]
pub struct SyntaxError {
    pub span: Span,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(span: Span, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { span, msg: msg.into() }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum FrontError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// Parse, type, let-normalize and annotate a source file.
pub fn load(src: &str) -> Result<Program, FrontError> {
    let mut prog = parse(src)?;
    infer_program(&mut prog)?;
    normalize::normalize_program(&mut prog);
    infer_program(&mut prog)?;
    cues::annotate_program(&mut prog);
    Ok(prog)
}
