use std::fmt;

use super::{ParseError, ParseErrorKind};
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Term(String),
    /// Consecutive tokens. Unquoted words that tokenize to several tokens
    /// (`self-assembly`) also become phrases.
    Phrase(Vec<String>),
}

impl Atom {
    pub fn tokens(&self) -> &[String] {
        match self {
            Atom::Term(t) => std::slice::from_ref(t),
            Atom::Phrase(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Group {
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryAst {
    pub groups: Vec<Group>,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Term(t) => f.write_str(t),
            Atom::Phrase(p) => write!(f, "\"{}\"", p.join(" ")),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.len() == 1 {
            return write!(f, "{}", self.atoms[0]);
        }
        f.write_str("(")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" OR ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    And,
    Or,
    Word(String),
    Quoted(String),
}

fn err(pos: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { pos, kind }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '(' {
            out.push((i, Tok::Open));
            i += 1;
        } else if c == ')' {
            out.push((i, Tok::Close));
            i += 1;
        } else if c == '"' {
            let start = i;
            i += 1;
            let body_start = i;
            while i < chars.len() && chars[i] != '"' {
                i += 1;
            }
            if i == chars.len() {
                return Err(err(start, ParseErrorKind::UnbalancedQuote));
            }
            out.push((start, Tok::Quoted(chars[body_start..i].iter().collect())));
            i += 1;
        } else {
            let start = i;
            while i < chars.len()
                && !chars[i].is_whitespace()
                && !matches!(chars[i], '(' | ')' | '"')
            {
                i += 1;
            }
            let w: String = chars[start..i].iter().collect();
            let tok = if w.eq_ignore_ascii_case("and") {
                Tok::And
            } else if w.eq_ignore_ascii_case("or") {
                Tok::Or
            } else {
                Tok::Word(w)
            };
            out.push((start, tok));
        }
    }
    Ok(out)
}

fn atom(pos: usize, tok: &Tok) -> Result<Atom, ParseError> {
    let (raw, quoted) = match tok {
        Tok::Word(w) => (w, false),
        Tok::Quoted(q) => (q, true),
        _ => unreachable!(),
    };
    let mut toks = tokenize(raw);
    match toks.len() {
        0 => Err(err(pos, ParseErrorKind::EmptyPhrase)),
        1 if !quoted => Ok(Atom::Term(toks.pop().unwrap())),
        _ => Ok(Atom::Phrase(toks)),
    }
}

/// Parses `text` into a [`QueryAst`].
pub fn parse_query(text: &str) -> Result<QueryAst, ParseError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(err(0, ParseErrorKind::Empty));
    }
    let mut groups = Vec::new();
    // true when the previous top-level item was an explicit AND
    let mut pending_and: Option<usize> = None;
    let mut i = 0;
    while i < toks.len() {
        let (pos, ref t) = toks[i];
        match t {
            Tok::And => {
                if groups.is_empty() || pending_and.is_some() {
                    return Err(err(pos, ParseErrorKind::DanglingOperator));
                }
                pending_and = Some(pos);
                i += 1;
            }
            Tok::Or => return Err(err(pos, ParseErrorKind::TopLevelOr)),
            Tok::Close => return Err(err(pos, ParseErrorKind::UnbalancedParen)),
            Tok::Word(_) | Tok::Quoted(_) => {
                groups.push(Group {
                    atoms: vec![atom(pos, t)?],
                });
                pending_and = None;
                i += 1;
            }
            Tok::Open => {
                let (g, next) = parse_group(&toks, i)?;
                groups.push(g);
                pending_and = None;
                i = next;
            }
        }
    }
    if let Some(p) = pending_and {
        return Err(err(p, ParseErrorKind::DanglingOperator));
    }
    Ok(QueryAst { groups })
}

/// Parses the group opening at `toks[open]`; returns it and the index after
/// its closing parenthesis.
fn parse_group(toks: &[(usize, Tok)], open: usize) -> Result<(Group, usize), ParseError> {
    let open_pos = toks[open].0;
    let mut atoms = Vec::new();
    let mut expect_atom = true;
    let mut last_or = None;
    let mut i = open + 1;
    while i < toks.len() {
        let (pos, ref t) = toks[i];
        match t {
            Tok::Open => return Err(err(pos, ParseErrorKind::NestedParens)),
            Tok::And => return Err(err(pos, ParseErrorKind::AndInsideGroup)),
            Tok::Close => {
                if atoms.is_empty() && last_or.is_none() {
                    return Err(err(open_pos, ParseErrorKind::EmptyGroup));
                }
                if expect_atom {
                    return Err(err(
                        last_or.unwrap_or(pos),
                        ParseErrorKind::DanglingOperator,
                    ));
                }
                return Ok((Group { atoms }, i + 1));
            }
            Tok::Or => {
                if expect_atom {
                    return Err(err(pos, ParseErrorKind::DanglingOperator));
                }
                expect_atom = true;
                last_or = Some(pos);
            }
            Tok::Word(_) | Tok::Quoted(_) => {
                if !expect_atom {
                    return Err(err(pos, ParseErrorKind::MissingOr));
                }
                atoms.push(atom(pos, t)?);
                expect_atom = false;
            }
        }
        i += 1;
    }
    Err(err(open_pos, ParseErrorKind::UnbalancedParen))
}
