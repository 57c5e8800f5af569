//! Band-arithmetic expressions for baseline indices.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | band | 'sqrt' '(' expr ')' | '(' expr ')'
//! ```
//!
//! Identifiers are band names (`B1 B2 G R NIR PAN T`) plus `B`, the mean of
//! B1 and B2. Division by a value within epsilon of zero, roots of negative
//! numbers and non-finite powers all yield nodata.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::raster::BandName;
use crate::EPSILON;

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Num(f64),
    Band(BandName),
    Blue,
    Neg(Box<Expr>),
    Sqrt(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Formula {
    source: String,
    expr: Expr,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Formula {
    pub fn parse(source: &str) -> Result<Self> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
        };
        let expr = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Formula {
            source: source.trim().to_string(),
            expr,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Bands the expression reads; `B` expands to B1 and B2.
    pub fn required_bands(&self) -> BTreeSet<BandName> {
        let mut out = BTreeSet::new();
        collect(&self.expr, &mut out);
        out
    }

    /// Evaluates with `lookup` supplying band values; `None` means nodata.
    pub fn eval(&self, lookup: &dyn Fn(BandName) -> Option<f64>) -> Option<f64> {
        eval(&self.expr, lookup).filter(|v| v.is_finite())
    }
}

fn collect(e: &Expr, out: &mut BTreeSet<BandName>) {
    match e {
        Expr::Num(_) => {}
        Expr::Band(b) => {
            out.insert(*b);
        }
        Expr::Blue => {
            out.insert(BandName::B1);
            out.insert(BandName::B2);
        }
        Expr::Neg(x) | Expr::Sqrt(x) => collect(x, out),
        Expr::Bin(_, a, b) => {
            collect(a, out);
            collect(b, out);
        }
    }
}

fn eval(e: &Expr, lookup: &dyn Fn(BandName) -> Option<f64>) -> Option<f64> {
    Some(match e {
        Expr::Num(v) => *v,
        Expr::Band(b) => lookup(*b)?,
        Expr::Blue => (lookup(BandName::B1)? + lookup(BandName::B2)?) / 2.0,
        Expr::Neg(x) => -eval(x, lookup)?,
        Expr::Sqrt(x) => {
            let v = eval(x, lookup)?;
            if v < 0.0 {
                return None;
            }
            v.sqrt()
        }
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval(a, lookup)?, eval(b, lookup)?);
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => {
                    if b.abs() <= EPSILON {
                        return None;
                    }
                    a / b
                }
                Op::Pow => {
                    let v = a.powf(b);
                    if !v.is_finite() {
                        return None;
                    }
                    v
                }
            }
        }
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, reason: &str) -> Error {
        Error::Formula {
            offset: self.pos,
            reason: reason.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => Op::Add,
                Some(b'-') => Op::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => Op::Mul,
                Some(b'/') => Op::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
                match ident {
                    "sqrt" => {
                        if !self.eat(b'(') {
                            return Err(self.error("expected `(` after sqrt"));
                        }
                        let e = self.expr()?;
                        if !self.eat(b')') {
                            return Err(self.error("expected `)`"));
                        }
                        Ok(Expr::Sqrt(Box::new(e)))
                    }
                    "B" => Ok(Expr::Blue),
                    other => other.parse::<BandName>().map(Expr::Band).map_err(|_| Error::Formula {
                        offset: start,
                        reason: format!("unknown identifier `{other}`"),
                    }),
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of formula")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        text.parse::<f64>().map(Expr::Num).map_err(|_| Error::Formula {
            offset: start,
            reason: format!("bad number `{text}`"),
        })
    }
}
