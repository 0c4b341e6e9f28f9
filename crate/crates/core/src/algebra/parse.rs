//! Text syntax for polynomials.
//!
//! Terms use `+ - * / ^` and parentheses; `i` is the imaginary unit unless a
//! variable of that name is declared. Division is only allowed by nonzero
//! constants. The printer in [`Polynomial::display`] emits exactly this
//! syntax, so `parse(print(p)) == p`.

use num_bigint::BigInt;
use num_traits::Zero;

use super::gaussian::{GaussianRational, Rational};
use super::polynomial::{default_names, Polynomial};
use super::univariate::{UPoly, URat};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(text.parse().map_err(|_| Error::Parse(text.clone()))?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

/// Targets of the expression grammar.
trait Ring: Sized {
    fn constant(names: &[String], c: GaussianRational) -> Self;
    fn variable(names: &[String], idx: usize) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn pow(&self, e: u32) -> Self;
}

impl Ring for Polynomial {
    fn constant(names: &[String], c: GaussianRational) -> Self {
        Polynomial::constant(names.len(), c)
    }
    fn variable(names: &[String], idx: usize) -> Self {
        Polynomial::var(names.len(), idx)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Result<Self> {
        let c = o.constant_value().ok_or_else(|| Error::Parse("division by a non-constant".into()))?;
        if c.is_zero() {
            return Err(Error::Parse("division by zero".into()));
        }
        Ok(self.scale(&c.inv()?))
    }
    fn pow(&self, e: u32) -> Self {
        Polynomial::pow(self, e)
    }
}

impl Ring for URat {
    fn constant(_: &[String], c: GaussianRational) -> Self {
        URat::from_poly(UPoly::constant(c))
    }
    fn variable(_: &[String], _: usize) -> Self {
        URat::from_poly(UPoly::from_ints(&[0, 1]))
    }
    fn add(&self, o: &Self) -> Self {
        URat::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        URat::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        URat::mul(self, o)
    }
    fn neg(&self) -> Self {
        URat::neg(self)
    }
    fn div(&self, o: &Self) -> Result<Self> {
        URat::div(self, o).map_err(|_| Error::Parse("division by zero".into()))
    }
    fn pow(&self, e: u32) -> Self {
        URat::pow(self, e)
    }
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr<R: Ring>(&mut self) -> Result<R> {
        let mut acc = self.term::<R>()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term<R: Ring>(&mut self) -> Result<R> {
        let mut acc = self.unary::<R>()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat('/') {
                acc = acc.div(&self.unary()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary<R: Ring>(&mut self) -> Result<R> {
        if self.eat('-') {
            return Ok(self.unary::<R>()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power<R: Ring>(&mut self) -> Result<R> {
        let base = self.atom::<R>()?;
        if self.eat('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(e)) => {
                    self.pos += 1;
                    let e: u32 = e.try_into().map_err(|_| Error::Parse("exponent too large".into()))?;
                    Ok(base.pow(e))
                }
                _ => Err(Error::Parse("expected a natural exponent after '^'".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom<R: Ring>(&mut self) -> Result<R> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(R::constant(self.names, GaussianRational::from_rational(Rational::from_integer(v))))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(idx) = self.names.iter().position(|x| *x == name) {
                    Ok(R::variable(self.names, idx))
                } else if name == "i" {
                    Ok(R::constant(self.names, GaussianRational::i()))
                } else {
                    Err(Error::Parse(format!("unknown variable {name:?}")))
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("expected ')'".into()));
                }
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

fn parse_with<R: Ring>(s: &str, names: &[String], what: &str) -> Result<R> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(Error::Parse(format!("empty {what}")));
    }
    let mut p = Parser { toks, pos: 0, names };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(out)
}

/// Parse a univariate rational function in `var`; division is unrestricted.
pub fn parse_rational_function(s: &str, var: &str) -> Result<URat> {
    parse_with(s, &[var.to_string()], "rational function")
}

/// Parse a polynomial in the ring whose variables are `names`.
pub fn parse_polynomial(s: &str, names: &[String]) -> Result<Polynomial> {
    parse_with(s, names, "polynomial")
}

/// Parse with the default variable names `x1..xn`.
pub fn parse_default(s: &str, n: usize) -> Result<Polynomial> {
    parse_polynomial(s, &default_names(n))
}

pub fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}
