//! Text-to-polynomial parser.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := '-'* power
//! power   := atom ('^' integer)?
//! atom    := integer | '[' integer (',' integer)* ']' | identifier | '(' expr ')'
//! ```
//!
//! `^` binds tightest and multiplication requires an explicit `*`. Integer
//! literals reduce modulo the characteristic; bracketed tuples give the
//! power-basis coordinates of an extension-field coefficient (the same shape
//! the canonical printer emits, so print/parse round-trips). Identifiers are
//! ring variables first, then named constants supplied by the caller.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::field::Felt;
use crate::poly::{Poly, PolyRing};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Syntax { line: usize, col: usize, message: String },
    UnknownVariable { name: String, line: usize, col: usize },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { line, col, message } => {
                write!(f, "syntax error at {line}:{col}: {message}")
            }
            ParseError::UnknownVariable { name, line, col } => {
                write!(f, "unknown variable `{name}` at {line}:{col}")
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(u64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let bump = |chars: &mut std::iter::Peekable<std::str::Chars>,
                        line: &mut usize,
                        col: &mut usize| {
            let c = chars.next().unwrap();
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars, &mut line, &mut col);
            continue;
        }
        if c.is_ascii_digit() {
            let mut value: u64 = 0;
            while let Some(&d) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                bump(&mut chars, &mut line, &mut col);
                value = value
                    .checked_mul(10)
                    .and_then(|v| v.checked_add(d as u64 - '0' as u64))
                    .ok_or(ParseError::Syntax {
                        line: tline,
                        col: tcol,
                        message: "integer literal too large".to_string(),
                    })?;
            }
            out.push(Spanned { tok: Tok::Int(value), line: tline, col: tcol });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut name = String::new();
            while let Some(&d) = chars.peek() {
                if !(d.is_ascii_alphanumeric() || d == '_') {
                    break;
                }
                name.push(bump(&mut chars, &mut line, &mut col));
            }
            out.push(Spanned { tok: Tok::Ident(name), line: tline, col: tcol });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            other => {
                return Err(ParseError::Syntax {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        bump(&mut chars, &mut line, &mut col);
        out.push(Spanned { tok, line: tline, col: tcol });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    ring: &'a Arc<PolyRing>,
    constants: &'a BTreeMap<String, Felt>,
    end_line: usize,
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        match self.peek() {
            Some(t) => (t.line, t.col),
            None => (self.end_line, self.end_col),
        }
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, message: message.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.tok == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => self.syntax(format!("expected {what}")),
        }
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Plus => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.add(&rhs).expect("same ring");
                }
                Tok::Minus => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.sub(&rhs).expect("same ring");
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.factor()?;
        while let Some(t) = self.peek() {
            if t.tok != Tok::Star {
                break;
            }
            self.pos += 1;
            let rhs = self.factor()?;
            acc = acc.mul(&rhs).expect("same ring");
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly, ParseError> {
        let mut negate = false;
        while let Some(t) = self.peek() {
            if t.tok == Tok::Minus {
                self.pos += 1;
                negate = !negate;
            } else {
                break;
            }
        }
        let p = self.power()?;
        Ok(if negate { p.neg() } else { p })
    }

    fn power(&mut self) -> Result<Poly, ParseError> {
        let base = self.atom()?;
        if let Some(t) = self.peek() {
            if t.tok == Tok::Caret {
                self.pos += 1;
                match self.next() {
                    Some(Spanned { tok: Tok::Int(e), .. }) => {
                        if e > u32::MAX as u64 {
                            return self.syntax("exponent too large");
                        }
                        return Ok(base.pow(e as u32));
                    }
                    _ => return self.syntax("expected integer exponent after `^`"),
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        let Some(t) = self.next() else {
            return self.syntax("unexpected end of input");
        };
        match t.tok {
            Tok::Int(n) => Ok(Poly::constant(
                &self.ring.clone(),
                self.ring.field.from_int((n % self.ring.field.characteristic()) as i64),
            )),
            Tok::LBracket => {
                let mut coords: Vec<i64> = Vec::new();
                loop {
                    match self.next() {
                        Some(Spanned { tok: Tok::Int(n), .. }) => {
                            coords.push((n % self.ring.field.characteristic()) as i64);
                        }
                        _ => return self.syntax("expected integer inside `[..]`"),
                    }
                    match self.next() {
                        Some(Spanned { tok: Tok::Comma, .. }) => continue,
                        Some(Spanned { tok: Tok::RBracket, .. }) => break,
                        _ => return self.syntax("expected `,` or `]`"),
                    }
                }
                match self.ring.field.from_coeffs(&coords) {
                    Ok(c) => Ok(Poly::constant(&self.ring.clone(), c)),
                    Err(e) => self.syntax(format!("bad coefficient tuple: {e}")),
                }
            }
            Tok::Ident(name) => {
                if let Some(idx) = self.ring.var_index(&name) {
                    return Ok(Poly::var(&self.ring.clone(), idx));
                }
                if let Some(&c) = self.constants.get(&name) {
                    return Ok(Poly::constant(&self.ring.clone(), c));
                }
                Err(ParseError::UnknownVariable { name, line: t.line, col: t.col })
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => {
                let (line, col) = (t.line, t.col);
                Err(ParseError::Syntax {
                    line,
                    col,
                    message: "expected a number, identifier, `[`, or `(`".to_string(),
                })
            }
        }
    }
}

/// Parse `src` into a polynomial of `ring`. `constants` binds identifiers
/// that are not ring variables (e.g. named parameters of a specialization).
pub fn parse_poly(
    ring: &Arc<PolyRing>,
    src: &str,
    constants: &BTreeMap<String, Felt>,
) -> Result<Poly, ParseError> {
    let toks = lex(src)?;
    let lines = src.lines().count().max(1);
    let end_col = src.lines().last().map_or(1, |l| l.chars().count() + 1);
    let mut parser = Parser {
        toks,
        pos: 0,
        ring,
        constants,
        end_line: lines,
        end_col,
    };
    let p = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return parser.syntax("trailing input");
    }
    Ok(p)
}
