//! Restricted arithmetic expressions over chart coordinates `x1..xn`.
//!
//! Supports `+ - * /`, integer powers `^k`, `sqrt(..)`, parentheses and
//! numeric literals: exactly what [`Jet2`] can propagate.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::ScalarField;
use crate::jets::Jet2;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based coordinate index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[Jet2]) -> Result<Jet2> {
        let arity = x.first().map_or(0, Jet2::arity);
        Ok(match self {
            Expr::Num(v) => Jet2::constant(*v, arity),
            Expr::Var(i) => x
                .get(*i)
                .cloned()
                .ok_or_else(|| Error::Arity(format!("x{} is not a coordinate", i + 1)))?,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Add(a, b) => a.eval(x)?.try_add(&b.eval(x)?)?,
            Expr::Sub(a, b) => a.eval(x)?.try_sub(&b.eval(x)?)?,
            Expr::Mul(a, b) => a.eval(x)?.try_mul(&b.eval(x)?)?,
            Expr::Div(a, b) => a.eval(x)?.checked_div(&b.eval(x)?)?,
            Expr::Pow(a, k) => a.eval(x)?.checked_powi(*k)?,
            Expr::Sqrt(a) => a.eval(x)?.checked_sqrt()?,
        })
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Sqrt(e) => e.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

fn invalid(message: String) -> Error {
    Error::validation("warp.expression", message)
}

impl Parser<'_> {
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(invalid(format!("expected `{}` at offset {}", c as char, self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let negative = self.eat(b'-');
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            let k: i32 = digits
                .parse()
                .map_err(|_| invalid(format!("expected an integer exponent at offset {start}")))?;
            return Ok(Expr::Pow(Box::new(base), if negative { -k } else { k }));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(b'x') => {
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                let idx: usize = digits
                    .parse()
                    .map_err(|_| invalid(format!("malformed variable at offset {}", start - 1)))?;
                if idx == 0 || idx > self.dim {
                    return Err(invalid(format!(
                        "variable x{idx} out of range; use x1..x{}",
                        self.dim
                    )));
                }
                Ok(Expr::Var(idx - 1))
            }
            Some(b's') if self.src[self.pos..].starts_with(b"sqrt") => {
                self.pos += 4;
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Sqrt(Box::new(e)))
            }
            Some(c) => Err(invalid(format!(
                "unexpected `{}` at offset {}",
                c as char, self.pos
            ))),
            None => Err(invalid("unexpected end of expression".into())),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let bytes = self.src;
        let mut i = self.pos;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        self.pos = i;
        let text = std::str::from_utf8(&bytes[start..i]).unwrap_or("");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| invalid(format!("malformed number `{text}` at offset {start}")))
    }
}

/// Parses `source` as an expression in the variables `x1..x{dim}`.
pub fn parse(source: &str, dim: usize) -> Result<Expr> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
        dim,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(invalid(format!("trailing input at offset {}", p.pos)));
    }
    Ok(e)
}

/// Parses `source` and wraps it as a scalar field on `dim` coordinates.
pub fn scalar_field(source: &str, dim: usize) -> Result<ScalarField> {
    let e = Arc::new(parse(source, dim)?);
    Ok(ScalarField::new(source.trim(), dim, move |x| e.eval(x)))
}
