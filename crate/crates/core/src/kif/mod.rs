//! SUO-KIF surface syntax: tokenizer, parser, canonical printer and formula
//! classification.
//!
//! The accepted grammar is the S-expression subset used by SUMO's `.kif`
//! files: parenthesised lists, `;` line comments, double-quoted strings,
//! `?`-prefixed variables, decimal numbers and bare identifiers. Row variables
//! (`@ROW`) and quoted terms are rejected.

mod lexer;
mod parser;
mod term;

use thiserror::Error;

pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;
pub use term::{classify, print_term, Decimal, FormulaKind, SourceSpan, Term, TermKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unterminated string literal")]
    UnterminatedString(SourceSpan),
    #[error("illegal character {ch:?}")]
    IllegalCharacter { span: SourceSpan, ch: char },
    #[error("unbalanced parenthesis")]
    UnbalancedParenthesis(SourceSpan),
    #[error("empty list \"()\" is not a term")]
    EmptyCompound(SourceSpan),
    #[error("unsupported syntax {text:?}")]
    UnsupportedSyntax { span: SourceSpan, text: String },
    #[error("variable sigil without a name")]
    EmptyVariable(SourceSpan),
}

impl ParseError {
    pub fn span(&self) -> SourceSpan {
        match self {
            ParseError::UnterminatedString(s)
            | ParseError::UnbalancedParenthesis(s)
            | ParseError::EmptyCompound(s)
            | ParseError::EmptyVariable(s) => *s,
            ParseError::IllegalCharacter { span, .. } | ParseError::UnsupportedSyntax { span, .. } => {
                *span
            }
        }
    }
}
