//! Input grammar for rational maps.
//!
//! ```text
//! rational := sum ('/' sum)?
//! sum      := term (('+' | '-') term)*
//! term     := factor ('*'? factor)*
//! factor   := INT | INT '/' INT | 'z' | factor '^' UINT | '(' sum ')' | '-' factor
//! ```
//!
//! Whitespace is ignored. Only one top-level division is allowed; a `/`
//! between two integer literals is a rational constant. The JSON form
//! `{"num": ["a0", ...], "den": ["b0", ...]}` is accepted as well.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::padic::ExactRational;
use crate::poly::QPoly;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Z,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let tok = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("ascii digits");
                out.push((start, Tok::Int(n)));
                continue;
            }
            'z' => Tok::Z,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => {
                return Err(Error::Parse {
                    position: i,
                    expected: vec!["integer".into(), "'z'".into(), "operator".into(), "parenthesis".into()],
                })
            }
        };
        out.push((i, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T> {
        Err(Error::Parse {
            position: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn rational(&mut self) -> Result<(QPoly, QPoly)> {
        let num = self.sum()?;
        let den = if self.eat(&Tok::Slash) {
            self.sum()?
        } else {
            QPoly::constant(BigRational::one())
        };
        if self.peek().is_some() {
            return self.fail(&["end of input"]);
        }
        Ok((num, den))
    }

    fn sum(&mut self) -> Result<QPoly> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc.add(&self.term()?);
            } else if self.eat(&Tok::Minus) {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<QPoly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(Tok::Int(_)) | Some(Tok::Z) | Some(Tok::LParen) => {
                    acc = acc.mul(&self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<QPoly> {
        let mut base = self.primary()?;
        while self.eat(&Tok::Caret) {
            match self.peek().cloned() {
                Some(Tok::Int(e)) => {
                    self.pos += 1;
                    let e: u32 = e.try_into().map_err(|_| Error::Parse {
                        position: self.offset(),
                        expected: vec!["small exponent".into()],
                    })?;
                    base = base.pow(e);
                }
                _ => return self.fail(&["unsigned integer exponent"]),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<QPoly> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                // INT '/' INT is a rational literal; any other '/' is the top-level division
                if self.peek() == Some(&Tok::Slash) {
                    if let Some(Tok::Int(d)) = self.peek_at(1).cloned() {
                        if d.is_zero() {
                            self.pos += 1;
                            return self.fail(&["nonzero denominator"]);
                        }
                        self.pos += 2;
                        return Ok(QPoly::constant(BigRational::new(n, d)));
                    }
                }
                Ok(QPoly::constant(BigRational::from_integer(n)))
            }
            Some(Tok::Z) => {
                self.pos += 1;
                Ok(QPoly::z())
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() == Some(&Tok::Slash) {
                    return self.fail(&["')' (nested division is not supported)"]);
                }
                if !self.eat(&Tok::RParen) {
                    return self.fail(&["')'"]);
                }
                Ok(inner)
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.factor()?.neg())
            }
            _ => self.fail(&["integer", "'z'", "'('", "'-'"]),
        }
    }
}

/// Parses the textual grammar into numerator and denominator polynomials.
pub fn parse_expression(text: &str) -> Result<(QPoly, QPoly)> {
    let toks = tokenize(text)?;
    let mut parser = Parser { toks, pos: 0, end: text.len() };
    let (num, den) = parser.rational()?;
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok((num, den))
}

#[derive(Deserialize)]
struct CoeffJson {
    num: Vec<ExactRational>,
    den: Vec<ExactRational>,
}

/// Parses `{"num": [...], "den": [...]}` (coefficients lowest degree first).
pub fn parse_coefficient_json(text: &str) -> Result<(QPoly, QPoly)> {
    let parsed: CoeffJson = serde_json::from_str(text).map_err(|e| Error::Parse {
        position: e.column().saturating_sub(1),
        expected: vec![format!("coefficient JSON ({e})")],
    })?;
    let to_poly = |v: Vec<ExactRational>| QPoly::new(v.into_iter().map(|c| c.into_big_rational()).collect());
    let (num, den) = (to_poly(parsed.num), to_poly(parsed.den));
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok((num, den))
}
