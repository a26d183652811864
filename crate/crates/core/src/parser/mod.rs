//! Surface language for `.coh` proof files: lexer, parser, name resolution
//! into core terms, and a pretty-printer whose output re-parses.

mod lexer;
mod parse;
mod print;
mod resolve;
mod surface;

pub use lexer::{tokenize, Token, TokenKind};
pub use parse::parse_module;
pub use print::{print_term, print_term_in};
pub use resolve::{resolve, resolve_term, LocatedDeclaration, ResolveError, ResolveErrorKind};
pub use surface::{SourceSpan, SurfaceDecl, SurfacePatternArg, SurfaceTerm};

use std::fmt;

/// A parse failure with its location and, when known, the expected token.
#[derive(Clone, Debug)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
    pub expected: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if let Some(expected) = &self.expected {
            write!(f, " (expected {})", expected)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}
