//! Tokenizer shared by all text parsers, and the parser for functions.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::function::CoeffFunction;
use super::gauss::Gauss;
use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: usize,
}

/// Splits input into numbers, identifiers and punctuation.
///
/// Identifiers are single letters, except `exp` and the initial values `u0`, `v0`, `w0`.
pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            let mut s = String::new();
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                s.push(chars[j].1);
                j += 1;
            }
            let n: BigInt = s.parse().map_err(|_| Error::parse(pos, "bad number"))?;
            out.push(Token { tok: Tok::Num(n), pos });
            i = j;
            continue;
        }
        if c.is_alphabetic() {
            let rest: String = chars[i..].iter().map(|(_, ch)| *ch).take(3).collect();
            if rest == "exp" {
                out.push(Token { tok: Tok::Ident("exp".into()), pos });
                i += 3;
                continue;
            }
            if "uvw".contains(c) && i + 1 < chars.len() && chars[i + 1].1 == '0' {
                out.push(Token { tok: Tok::Ident(format!("{}0", c)), pos });
                i += 2;
                continue;
            }
            out.push(Token { tok: Tok::Ident(c.to_string()), pos });
            i += 1;
            continue;
        }
        if "+-*/^()[],.'".contains(c) {
            out.push(Token { tok: Tok::Sym(c), pos });
            i += 1;
            continue;
        }
        return Err(Error::parse(pos, format!("unexpected character '{}'", c)));
    }
    Ok(out)
}

/// Cursor over a token stream.
pub struct Cursor {
    toks: Vec<Token>,
    idx: usize,
    end: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self> {
        let toks = tokenize(src)?;
        Ok(Cursor { toks, idx: 0, end: src.len() })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|t| &t.tok)
    }

    pub fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.idx + k).map(|t| &t.tok)
    }

    pub fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|t| t.pos).unwrap_or(self.end)
    }

    pub fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|t| t.tok.clone());
        self.idx += 1;
        t
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    pub fn is_sym(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Sym(c))
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    pub fn eat_sym(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c)))
        }
    }

    pub fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.pos(), msg)
    }

    /// Parses an unsigned integer exponent after `^`.
    pub fn exponent(&mut self) -> Result<u32> {
        let pos = self.pos();
        let paren = self.eat_sym('(');
        let v = match self.bump() {
            Some(Tok::Num(n)) => u32::try_from(n).map_err(|_| Error::parse(pos, "exponent too large"))?,
            _ => return Err(Error::parse(pos, "expected a natural exponent")),
        };
        if paren {
            self.expect_sym(')')?;
        }
        Ok(v)
    }
}

/// Parses the text syntax for functions, e.g. `3*x^2*exp(2*x) + (1/2)`.
pub fn parse_function(src: &str) -> Result<CoeffFunction> {
    let mut c = Cursor::new(src)?;
    if c.at_end() {
        return Err(c.error("empty expression"));
    }
    let f = function_expr(&mut c)?;
    c.expect_end()?;
    Ok(f)
}

/// Parses a Gaussian-rational constant such as `1/2` or `1+i`.
pub fn parse_gauss(src: &str) -> Result<Gauss> {
    let f = parse_function(src)?;
    f.constant_value().and_then(|s| s.as_gauss()).ok_or_else(|| Error::parse(0, "expected a Gaussian rational constant"))
}

pub fn function_expr(c: &mut Cursor) -> Result<CoeffFunction> {
    let mut acc = function_term(c)?;
    loop {
        if c.eat_sym('+') {
            acc = acc.plus(&function_term(c)?);
        } else if c.eat_sym('-') {
            acc = acc.minus(&function_term(c)?);
        } else {
            return Ok(acc);
        }
    }
}

fn starts_atom(t: Option<&Tok>) -> bool {
    match t {
        Some(Tok::Num(_)) => true,
        Some(Tok::Ident(s)) => s == "x" || s == "i" || s == "exp",
        Some(Tok::Sym('(')) => true,
        _ => false,
    }
}

fn function_term(c: &mut Cursor) -> Result<CoeffFunction> {
    let mut acc = function_unary(c)?;
    loop {
        if c.eat_sym('*') {
            acc = acc.times(&function_unary(c)?);
        } else if c.is_sym('/') {
            let pos = c.pos();
            c.bump();
            let d = function_unary(c)?;
            acc = acc.times(&divisor_inverse(&d, pos)?);
        } else if starts_atom(c.peek()) {
            acc = acc.times(&function_unary(c)?);
        } else {
            return Ok(acc);
        }
    }
}

/// Inverse of a divisor: a nonzero constant or a unit `c·e^{λx}`.
pub fn divisor_inverse(d: &CoeffFunction, pos: usize) -> Result<CoeffFunction> {
    match d.constant_value() {
        Some(s) if s.is_zero() => Err(Error::parse(pos, "division by zero")),
        Some(s) => Ok(CoeffFunction::constant(s.inv())),
        None => d.invert().map_err(|_| Error::parse(pos, "division by a non-unit")),
    }
}

fn function_unary(c: &mut Cursor) -> Result<CoeffFunction> {
    if c.eat_sym('-') {
        return Ok(function_unary(c)?.negate());
    }
    if c.eat_sym('+') {
        return function_unary(c);
    }
    let base = function_atom(c)?;
    if c.eat_sym('^') {
        let e = c.exponent()?;
        return Ok(base.pow(e));
    }
    Ok(base)
}

fn function_atom(c: &mut Cursor) -> Result<CoeffFunction> {
    let pos = c.pos();
    match c.bump() {
        Some(Tok::Num(n)) => Ok(CoeffFunction::constant(Scalar::from_gauss(Gauss::from_rational(BigRational::from_integer(n))))),
        Some(Tok::Ident(s)) if s == "x" => Ok(CoeffFunction::x()),
        Some(Tok::Ident(s)) if s == "i" => Ok(CoeffFunction::constant(Scalar::from_gauss(Gauss::i()))),
        Some(Tok::Ident(s)) if s == "exp" => {
            c.expect_sym('(')?;
            let arg = function_expr(c)?;
            c.expect_sym(')')?;
            exp_of(&arg).ok_or_else(|| Error::parse(pos, "exp argument must be a + λ*x with Gaussian-rational a, λ"))
        }
        Some(Tok::Sym('(')) => {
            let f = function_expr(c)?;
            c.expect_sym(')')?;
            Ok(f)
        }
        _ => Err(Error::parse(pos, "expected a number, x, i, exp(...) or '('")),
    }
}

/// `exp(a + λx) = exp(a)·e^{λx}` for Gaussian-rational `a`, `λ`.
pub fn exp_of(arg: &CoeffFunction) -> Option<CoeffFunction> {
    let mut a = Gauss::zero();
    let mut lambda = Gauss::zero();
    for ((k, l), coef) in arg.terms() {
        if !l.is_zero() {
            return None;
        }
        let g = coef.as_gauss()?;
        match k {
            0 => a = g,
            1 => lambda = g,
            _ => return None,
        }
    }
    let s = if a.is_zero() { Scalar::one() } else { Scalar::exp(a) };
    Some(CoeffFunction::monomial(s, 0, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spec_syntax() {
        let f = parse_function("3*x^2*exp(2*x) + (1/2)").unwrap();
        assert_eq!(f.render(), "3*x^2*exp(2*x) + (1/2)");
    }

    #[test]
    fn parses_scalar_exponentials() {
        let f = parse_function("exp(2)").unwrap();
        assert_eq!(f.constant_value().unwrap(), Scalar::exp(Gauss::int(2)));
        let g = parse_function("exp(1+x)").unwrap();
        assert_eq!(g.render(), "exp(1)*exp(x)");
    }

    #[test]
    fn reports_position() {
        match parse_function("x + $") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn division_by_units_only() {
        assert!(parse_function("x/exp(x)").is_ok());
        assert!(parse_function("1/x").is_err());
    }
}
