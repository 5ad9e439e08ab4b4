//! Text syntax for base-field elements and polynomials.
//!
//! ```text
//! expr   := ["+"|"-"] term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := atom ("^" nat)?
//! atom   := nat | var | "(" expr ")"
//! ```
//!
//! `var` is `x` or the base-field variable (`y` by default). Juxtaposition is
//! not multiplication: `y x` is rejected. A divisor must not involve `x`, so
//! `a/b` literals and fractions like `(y^2+1)/(2*y)` are ordinary terms.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::basefield::{BaseFieldConfig, KElem, YPoly};
use crate::numeric::Rat;
use crate::poly::{Field, Poly};

/// Exponents above this are rejected rather than expanded.
pub const MAX_EXPONENT: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: expected {expected}, found {found}")]
    Syntax {
        pos: usize,
        expected: String,
        found: String,
    },
    #[error("negative exponent at {pos}")]
    NegativeExponent { pos: usize },
    #[error("exponent at {pos} exceeds {MAX_EXPONENT}")]
    ExponentTooLarge { pos: usize },
    #[error("unknown variable {name:?} at {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("divisor at {pos} involves x")]
    NonConstantDivisor { pos: usize },
    #[error("division by zero at {pos}")]
    DivisionByZero { pos: usize },
    #[error("expected an element of the base field, found a polynomial in x")]
    NotInBaseField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Base,
}

/// Parsed expression tree, with the byte offset of each division and
/// exponent kept for error reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyExpr {
    Int(BigInt),
    Var(Var),
    Neg(Box<PolyExpr>),
    Add(Box<PolyExpr>, Box<PolyExpr>),
    Sub(Box<PolyExpr>, Box<PolyExpr>),
    Mul(Box<PolyExpr>, Box<PolyExpr>),
    Div(Box<PolyExpr>, Box<PolyExpr>, usize),
    Pow(Box<PolyExpr>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "{n:?}"),
            Tok::Ident(s) => write!(f, "{s:?}"),
            Tok::Sym(c) => write!(f, "{c:?}"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            toks.push((Tok::Int(text[start..i].parse().unwrap()), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            toks.push((Tok::Ident(text[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            toks.push((Tok::Sym(c), i));
            i += 1;
        } else {
            let found = text[i..].chars().next().unwrap();
            return Err(ParseError::Syntax {
                pos: i,
                expected: "a number, variable, operator or parenthesis".into(),
                found: format!("{found:?}"),
            });
        }
    }
    toks.push((Tok::End, text.len()));
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    base_var: Option<&'a str>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            expected: expected.into(),
            found: self.peek().to_string(),
        })
    }

    fn expr(&mut self) -> Result<PolyExpr, ParseError> {
        let mut lhs = match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                PolyExpr::Neg(Box::new(self.term()?))
            }
            Tok::Sym('+') => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = PolyExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = PolyExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<PolyExpr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    lhs = PolyExpr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Sym('/') => {
                    let pos = self.pos();
                    self.bump();
                    lhs = PolyExpr::Div(Box::new(lhs), Box::new(self.factor()?), pos);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<PolyExpr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                let e = u32::try_from(n)
                    .ok()
                    .filter(|e| *e <= MAX_EXPONENT)
                    .ok_or(ParseError::ExponentTooLarge { pos })?;
                Ok(PolyExpr::Pow(Box::new(base), e))
            }
            Tok::Sym('-') => Err(ParseError::NegativeExponent { pos }),
            _ => self.fail("a natural exponent"),
        }
    }

    fn atom(&mut self) -> Result<PolyExpr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(PolyExpr::Int(n))
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "x" {
                    Ok(PolyExpr::Var(Var::X))
                } else if Some(name.as_str()) == self.base_var {
                    Ok(PolyExpr::Var(Var::Base))
                } else {
                    Err(ParseError::UnknownVariable { name, pos })
                }
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                if *self.peek() != Tok::Sym(')') {
                    return self.fail("')'");
                }
                self.bump();
                Ok(e)
            }
            _ => self.fail("a number, variable or '('"),
        }
    }
}

/// Parse `text` into an expression tree without evaluating it.
pub fn parse_expr(text: &str, cfg: &BaseFieldConfig) -> Result<PolyExpr, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
        base_var: cfg.var(),
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("an operator or end of input");
    }
    Ok(e)
}

impl PolyExpr {
    /// Evaluate to a polynomial in `x` over `K`.
    pub fn lower(&self) -> Result<Poly, ParseError> {
        Ok(match self {
            PolyExpr::Int(n) => Poly::constant(KElem::from_rat(Rat::from_integer(n.clone()))),
            PolyExpr::Var(Var::X) => Poly::var(),
            PolyExpr::Var(Var::Base) => Poly::constant(KElem::y()),
            PolyExpr::Neg(e) => -&e.lower()?,
            PolyExpr::Add(a, b) => &a.lower()? + &b.lower()?,
            PolyExpr::Sub(a, b) => &a.lower()? - &b.lower()?,
            PolyExpr::Mul(a, b) => &a.lower()? * &b.lower()?,
            PolyExpr::Div(a, b, pos) => {
                let d = b.lower()?;
                if !d.is_constant() {
                    return Err(ParseError::NonConstantDivisor { pos: *pos });
                }
                let inv = d.coeff(0).inv().ok_or(ParseError::DivisionByZero { pos: *pos })?;
                a.lower()?.scale(&inv)
            }
            PolyExpr::Pow(a, e) => a.lower()?.pow(*e),
        })
    }
}

pub fn parse_poly(text: &str, cfg: &BaseFieldConfig) -> Result<Poly, ParseError> {
    parse_expr(text, cfg)?.lower()
}

/// Parse an element of `K`; `x` must not occur.
pub fn parse_kelem(text: &str, cfg: &BaseFieldConfig) -> Result<KElem, ParseError> {
    let p = parse_poly(text, cfg)?;
    if !p.is_constant() {
        return Err(ParseError::NotInBaseField);
    }
    Ok(p.coeff(0))
}

#[cfg(test)]
pub(crate) fn parse_poly_default(text: &str) -> Poly {
    parse_poly(text, &BaseFieldConfig::function_field()).unwrap()
}

/// One signed summand of a printed sum.
struct Summand {
    negative: bool,
    body: String,
}

fn join(summands: &[Summand]) -> String {
    if summands.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, s) in summands.iter().enumerate() {
        match (i, s.negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&s.body);
    }
    out
}

/// `c * name^k` with `c > 0`.
fn monomial_body(c: &Rat, name: &str, k: usize) -> String {
    let power = match k {
        0 => String::new(),
        1 => name.to_string(),
        _ => format!("{name}^{k}"),
    };
    match (c.is_one(), power.is_empty()) {
        (_, true) => c.to_string(),
        (true, false) => power,
        (false, false) => format!("{c}*{power}"),
    }
}

fn ypoly_summands(p: &YPoly, var: &str) -> Vec<Summand> {
    p.coeffs()
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| Summand {
            negative: c.is_negative(),
            body: monomial_body(&c.abs(), var, k),
        })
        .collect()
}

pub fn format_ypoly(p: &YPoly, var: &str) -> String {
    join(&ypoly_summands(p, var))
}

pub fn format_kelem(c: &KElem, var: &str) -> String {
    let num = format_ypoly(c.num(), var);
    if c.is_polynomial() {
        return num;
    }
    let wrap = |p: &YPoly, s: String| {
        if p.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 {
            format!("({s})")
        } else {
            s
        }
    };
    let den = format_ypoly(c.den(), var);
    format!("{}/{}", wrap(c.num(), num), wrap(c.den(), den))
}

fn x_power(k: usize) -> String {
    match k {
        0 => String::new(),
        1 => "x".into(),
        _ => format!("x^{k}"),
    }
}

/// Canonical text of a polynomial, highest power of `x` first.
pub fn format_poly(f: &Poly, var: &str) -> String {
    let mut summands = Vec::new();
    for (k, c) in f.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let xs = x_power(k);
        let single = c.is_polynomial() && c.num().coeffs().iter().filter(|a| !a.is_zero()).count() == 1;
        if single {
            let e = c.num().order().unwrap();
            let a = c.num().coeff(e);
            let body = monomial_body(&a.abs(), var, e);
            let body = match (body.as_str(), xs.is_empty()) {
                (_, true) => body,
                ("1", false) => xs,
                (_, false) => format!("{body}*{xs}"),
            };
            summands.push(Summand {
                negative: a.is_negative(),
                body,
            });
        } else if xs.is_empty() && c.is_polynomial() {
            summands.extend(ypoly_summands(c.num(), var));
        } else if xs.is_empty() {
            let negative = c.num().leading_coeff().is_some_and(Rat::is_negative);
            let shown = if negative { c.neg() } else { c.clone() };
            summands.push(Summand {
                negative,
                body: format_kelem(&shown, var),
            });
        } else {
            summands.push(Summand {
                negative: false,
                body: format!("({})*{xs}", format_kelem(c, var)),
            });
        }
    }
    join(&summands)
}

/// Base-field variable name used when printing under `cfg`.
pub fn var_name(cfg: &BaseFieldConfig) -> &str {
    cfg.var().unwrap_or("y")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::poly_strategy;
    use proptest::prelude::*;

    fn ff() -> BaseFieldConfig {
        BaseFieldConfig::function_field()
    }

    #[test]
    fn parses_basic_forms() {
        let f = parse_poly("x^2 - y", &ff()).unwrap();
        assert_eq!(f, &Poly::var().pow(2) - &Poly::constant(KElem::y()));
        let g = parse_poly("(1/2)*y^3*x + 7", &ff()).unwrap();
        assert_eq!(format_poly(&g, "y"), "1/2*y^3*x + 7");
        assert_eq!(parse_poly("-x", &ff()).unwrap(), -&Poly::var());
        assert_eq!(parse_poly("3/2*y^2", &ff()).unwrap(), parse_poly("(3*y^2)/2", &ff()).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse_poly("x^-1", &ff()),
            Err(ParseError::NegativeExponent { pos: 2 })
        ));
        assert!(matches!(parse_poly("y x", &ff()), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_poly("x +", &ff()), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_poly("(x", &ff()), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_poly("x $ 1", &ff()), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(
            parse_poly("1/x", &ff()),
            Err(ParseError::NonConstantDivisor { pos: 1 })
        ));
        assert!(matches!(
            parse_poly("1/(y - y)", &ff()),
            Err(ParseError::DivisionByZero { .. })
        ));
        assert!(matches!(
            parse_poly("z + 1", &ff()),
            Err(ParseError::UnknownVariable { .. })
        ));
        let p3 = BaseFieldConfig::p_adic(3).unwrap();
        assert!(matches!(parse_poly("y*x", &p3), Err(ParseError::UnknownVariable { .. })));
        assert_eq!(parse_kelem("x + 1", &ff()), Err(ParseError::NotInBaseField));
        assert!(matches!(parse_poly("x^99999", &ff()), Err(ParseError::ExponentTooLarge { .. })));
    }

    #[test]
    fn custom_variable_name() {
        let cfg = BaseFieldConfig::FunctionField { var: "t".into() };
        let f = parse_poly("x + t^2", &cfg).unwrap();
        assert_eq!(format_poly(&f, "t"), "x + t^2");
        assert!(parse_poly("x + y", &cfg).is_err());
    }

    #[test]
    fn prints_canonically() {
        let p = |s| format_poly(&parse_poly(s, &ff()).unwrap(), "y");
        assert_eq!(p("y + x*x - y"), "x^2");
        assert_eq!(p("0"), "0");
        assert_eq!(p("-y - y^2/2 + x"), "x - 1/2*y^2 - y");
        assert_eq!(p("(y + 1)*x^3 - 2*x"), "(y + 1)*x^3 - 2*x");
        assert_eq!(p("(y^2+1)/(2*y)"), "(1/2*y^2 + 1/2)/y");
        assert_eq!(p("x/(y + 1)"), "(1/(y + 1))*x");
        assert_eq!(format_kelem(&parse_kelem("-3/y^2", &ff()).unwrap(), "y"), "-3/y^2");
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(f in poly_strategy(6)) {
            let text = format_poly(&f, "y");
            prop_assert_eq!(parse_poly(&text, &ff()).unwrap(), f);
        }
    }
}
