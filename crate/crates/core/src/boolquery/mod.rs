//! Flat Boolean query language over title and abstract.
//!
//! A query is a series of AND-connected groups. A group is a single atom or a
//! parenthesised OR list of atoms; an atom is a bare term or a quoted phrase.
//! Space-separated items at the top level are implicitly AND-ed, nesting is
//! rejected, and OR is only legal inside parentheses. Keywords are
//! case-insensitive.

mod index;
mod parse;

use std::fmt;

pub use index::{evaluate, InvertedIndex, Posting};
pub use parse::{parse_query, Atom, Group, QueryAst};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    NestedParens,
    UnbalancedParen,
    UnbalancedQuote,
    EmptyGroup,
    EmptyPhrase,
    TopLevelOr,
    AndInsideGroup,
    MissingOr,
    DanglingOperator,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Empty => "empty query",
            Self::NestedParens => "nested parentheses are not allowed",
            Self::UnbalancedParen => "unbalanced parenthesis",
            Self::UnbalancedQuote => "unterminated quote",
            Self::EmptyGroup => "empty group",
            Self::EmptyPhrase => "phrase or term has no tokens",
            Self::TopLevelOr => "OR outside parentheses",
            Self::AndInsideGroup => "AND inside parentheses",
            Self::MissingOr => "atoms inside parentheses must be separated by OR",
            Self::DanglingOperator => "operator without operand",
        })
    }
}

/// Parse failure; `pos` is the character offset into the query text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at position {pos}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}
