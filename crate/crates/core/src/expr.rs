//! Real-valued expressions in the surface parameters `s`, `u`, `v`.
//!
//! Curves and marching-scale functions are supplied at runtime as text. This
//! module parses them into an [`Expr`] tree, evaluates them, and differentiates
//! them symbolically so that the higher derivatives needed by the Frenet
//! apparatus and the exact partials at the anchor are available without
//! finite differences.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := "-" factor | power
//! power  := atom ("^" atom)?
//! atom   := number | "pi" | "s" | "u" | "v" | func "(" expr ")" | "(" expr ")"
//! func   := "sin" | "cos" | "tan" | "exp" | "ln" | "sqrt"
//! ```
//!
//! The exponent of `^` must fold to a constant. Integer exponents with
//! magnitude at most 8 become repeated multiplication (a reciprocal for
//! negative ones); any other exponent `k` becomes `exp(k*ln(x))`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Free variables of an expression. `U` and `V` stand for the two surface
/// parameters of the hypersurface family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    S,
    U,
    V,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::S, Var::U, Var::V];

    pub fn name(self) -> &'static str {
        match self {
            Var::S => "s",
            Var::U => "u",
            Var::V => "v",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

impl UnaryOp {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
        }
    }

    fn apply(self, x: f64) -> Result<f64, DomainErrorKind> {
        match self {
            UnaryOp::Neg => Ok(-x),
            UnaryOp::Sin => Ok(x.sin()),
            UnaryOp::Cos => Ok(x.cos()),
            UnaryOp::Tan => Ok(x.tan()),
            UnaryOp::Exp => Ok(x.exp()),
            UnaryOp::Ln if x <= 0.0 => Err(DomainErrorKind::LogOfNonPositive(x)),
            UnaryOp::Ln => Ok(x.ln()),
            UnaryOp::Sqrt if x < 0.0 => Err(DomainErrorKind::SqrtOfNegative(x)),
            UnaryOp::Sqrt => Ok(x.sqrt()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }

    fn apply(self, a: f64, b: f64) -> Result<f64, DomainErrorKind> {
        match self {
            BinaryOp::Add => Ok(a + b),
            BinaryOp::Sub => Ok(a - b),
            BinaryOp::Mul => Ok(a * b),
            BinaryOp::Div if b == 0.0 => Err(DomainErrorKind::DivisionByZero),
            BinaryOp::Div => Ok(a / b),
        }
    }
}

/// Expression tree. Powers are desugared at parse time, so there is no power
/// node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainErrorKind {
    #[error("logarithm of non-positive value {0}")]
    LogOfNonPositive(f64),
    #[error("square root of negative value {0}")]
    SqrtOfNegative(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{subexpr}`")]
pub struct EvalError {
    pub kind: DomainErrorKind,
    /// Printed form of the offending subexpression.
    pub subexpr: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    InvalidNumber(String),
    UnknownIdentifier(String),
    MissingParenthesis(String),
    NonConstantExponent,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected token `{t}`"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::InvalidNumber(t) => write!(f, "invalid number `{t}`"),
            ParseErrorKind::UnknownIdentifier(t) => write!(f, "unknown identifier `{t}`"),
            ParseErrorKind::MissingParenthesis(t) => {
                write!(f, "function `{t}` must be followed by `(`")
            }
            ParseErrorKind::NonConstantExponent => f.write_str("exponent must be a constant"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn zero() -> Self {
        Expr::Const(0.0)
    }

    pub fn one() -> Self {
        Expr::Const(1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    // Simplifying constructors. Folding only happens when the folded value is
    // finite and defined, so domain errors are never hidden by folding
    // constants.

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Unary(UnaryOp::Neg, inner) => *inner,
            a => Expr::Unary(UnaryOp::Neg, Box::new(a)),
        }
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        if op == UnaryOp::Neg {
            return Expr::neg(a);
        }
        if let Some(c) = a.as_const() {
            if let Ok(r) = op.apply(c) {
                if r.is_finite() {
                    return Expr::Const(r);
                }
            }
        }
        Expr::Unary(op, Box::new(a))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if (x + y).is_finite() => Expr::Const(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Binary(BinaryOp::Add, Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if (x - y).is_finite() => Expr::Const(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Binary(BinaryOp::Sub, Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if (x * y).is_finite() => Expr::Const(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::zero(),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Expr::neg(b),
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            _ => Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != 0.0 && (x / y).is_finite() => Expr::Const(x / y),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Binary(BinaryOp::Div, Box::new(a), Box::new(b)),
        }
    }

    fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinaryOp::Add => Expr::add(a, b),
            BinaryOp::Sub => Expr::sub(a, b),
            BinaryOp::Mul => Expr::mul(a, b),
            BinaryOp::Div => Expr::div(a, b),
        }
    }

    /// Rebuilds the tree bottom-up through the simplifying constructors.
    pub fn simplified(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => Expr::unary(*op, a.simplified()),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.simplified(), b.simplified()),
        }
    }

    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Unary(_, a) => a.uses(var),
            Expr::Binary(_, a, b) => a.uses(var) || b.uses(var),
        }
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        Var::ALL.into_iter().filter(|&v| self.uses(v)).collect()
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn eval(&self, s: f64, u: f64, v: f64) -> Result<f64, EvalError> {
        let fail = |kind| EvalError { kind, subexpr: self.to_string() };
        let value = match self {
            Expr::Const(c) => *c,
            Expr::Var(Var::S) => s,
            Expr::Var(Var::U) => u,
            Expr::Var(Var::V) => v,
            Expr::Unary(op, a) => op.apply(a.eval(s, u, v)?).map_err(fail)?,
            Expr::Binary(op, a, b) => {
                op.apply(a.eval(s, u, v)?, b.eval(s, u, v)?).map_err(fail)?
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(fail(DomainErrorKind::NonFinite))
        }
    }

    /// Exact symbolic derivative with respect to `var`.
    pub fn diff(&self, var: Var) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(v) => Expr::Const(if *v == var { 1.0 } else { 0.0 }),
            Expr::Unary(op, a) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                let a = (**a).clone();
                match op {
                    UnaryOp::Neg => Expr::neg(da),
                    UnaryOp::Sin => Expr::mul(Expr::unary(UnaryOp::Cos, a), da),
                    UnaryOp::Cos => Expr::neg(Expr::mul(Expr::unary(UnaryOp::Sin, a), da)),
                    UnaryOp::Tan => {
                        let c = Expr::unary(UnaryOp::Cos, a);
                        Expr::div(da, Expr::mul(c.clone(), c))
                    }
                    UnaryOp::Exp => Expr::mul(Expr::unary(UnaryOp::Exp, a), da),
                    UnaryOp::Ln => Expr::div(da, a),
                    UnaryOp::Sqrt => Expr::div(
                        da,
                        Expr::mul(Expr::Const(2.0), Expr::unary(UnaryOp::Sqrt, a)),
                    ),
                }
            }
            Expr::Binary(op, a, b) => {
                let da = a.diff(var);
                let db = b.diff(var);
                match op {
                    BinaryOp::Add => Expr::add(da, db),
                    BinaryOp::Sub => Expr::sub(da, db),
                    BinaryOp::Mul => Expr::add(
                        Expr::mul(da, (**b).clone()),
                        Expr::mul((**a).clone(), db),
                    ),
                    BinaryOp::Div => {
                        if db.is_zero() {
                            Expr::div(da, (**b).clone())
                        } else {
                            Expr::div(
                                Expr::sub(
                                    Expr::mul(da, (**b).clone()),
                                    Expr::mul((**a).clone(), db),
                                ),
                                Expr::mul((**b).clone(), (**b).clone()),
                            )
                        }
                    }
                }
            }
        }
    }

    /// `order`-th derivative with respect to `var`.
    pub fn diff_n(&self, var: Var, order: usize) -> Expr {
        (0..order).fold(self.clone(), |e, _| e.diff(var))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{})", -c)
            }
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(src: &str) -> Result<Self, ParseError> {
        parse(src)
    }
}

/// Parses and simplifies.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    parse_raw(src).map(|e| e.simplified())
}

/// Parses without the simplification pass. Powers are still desugared.
pub fn parse_raw(src: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, len: src.len() };
    let e = p.expr()?;
    match p.peek() {
        None => Ok(e),
        Some(t) => Err(p.unexpected(t)),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "{x}"),
            Tok::Ident(s) => f.write_str(s),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
            Tok::Star => f.write_str("*"),
            Tok::Slash => f.write_str("/"),
            Tok::Caret => f.write_str("^"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' | b'.' => {
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
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    kind: ParseErrorKind::InvalidNumber(text.to_string()),
                    offset: start,
                })?;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(ch), offset: start });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |(_, o)| *o)
    }

    fn unexpected(&self, t: &Tok) -> ParseError {
        ParseError { kind: ParseErrorKind::UnexpectedToken(t.to_string()), offset: self.offset() }
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        match self.tokens.get(self.pos) {
            Some((t, _)) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(ParseError { kind: ParseErrorKind::UnexpectedEnd, offset: self.len }),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.unexpected(t)),
            None => Err(ParseError { kind: ParseErrorKind::UnexpectedEnd, offset: self.len }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinaryOp::Add,
                Some(Tok::Minus) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinaryOp::Mul,
                Some(Tok::Slash) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let exp_offset = self.offset();
        let exponent = self.atom()?;
        let k = match exponent.eval(0.0, 0.0, 0.0) {
            Ok(k) if exponent.variables().is_empty() => k,
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::NonConstantExponent,
                    offset: exp_offset,
                })
            }
        };
        Ok(desugar_power(base, k))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.next()? {
            Tok::Num(x) => Ok(Expr::Const(x)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                "s" => Ok(Expr::Var(Var::S)),
                "u" => Ok(Expr::Var(Var::U)),
                "v" => Ok(Expr::Var(Var::V)),
                _ => {
                    let Some(op) = UnaryOp::from_name(&name) else {
                        return Err(ParseError {
                            kind: ParseErrorKind::UnknownIdentifier(name),
                            offset,
                        });
                    };
                    if self.peek() != Some(&Tok::LParen) {
                        return Err(ParseError {
                            kind: ParseErrorKind::MissingParenthesis(name),
                            offset: self.offset(),
                        });
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Unary(op, Box::new(arg)))
                }
            },
            t => {
                self.pos -= 1;
                Err(self.unexpected(&t))
            }
        }
    }
}

fn desugar_power(base: Expr, k: f64) -> Expr {
    if k.fract() == 0.0 && k.abs() <= 8.0 {
        let n = k.abs() as usize;
        let product = (1..n).fold(
            if n == 0 { Expr::Const(1.0) } else { base.clone() },
            |acc, _| Expr::Binary(BinaryOp::Mul, Box::new(acc), Box::new(base.clone())),
        );
        if k < 0.0 {
            Expr::Binary(BinaryOp::Div, Box::new(Expr::Const(1.0)), Box::new(product))
        } else {
            product
        }
    } else {
        let log = Expr::Unary(UnaryOp::Ln, Box::new(base));
        let scaled = Expr::Binary(BinaryOp::Mul, Box::new(Expr::Const(k)), Box::new(log));
        Expr::Unary(UnaryOp::Exp, Box::new(scaled))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn p(src: &str) -> Expr {
        parse(src).unwrap_or_else(|e| panic!("{src}: {e}"))
    }

    #[test]
    fn parses_scaled_sine() {
        let e = p("sqrt(2)*sin(s)");
        assert!((e.eval(FRAC_PI_2, 0.0, 0.0).unwrap() - SQRT_2).abs() < 1e-15);
        assert!((e.eval(0.3, 0.0, 0.0).unwrap() - SQRT_2 * 0.3_f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn single_variable() {
        assert_eq!(p("s"), Expr::Var(Var::S));
        assert_eq!(p("u"), Expr::Var(Var::U));
    }

    #[test]
    fn anchored_product() {
        let e = p("v*(u - 0)*(v - 0.5)");
        assert_eq!(e.variables(), [Var::U, Var::V].into_iter().collect());
        assert_eq!(e.eval(0.0, 0.0, 0.3).unwrap(), 0.0);
        assert_eq!(e.eval(0.0, 0.7, 0.5).unwrap(), 0.0);
        assert!((e.eval(0.0, 2.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn precedence() {
        assert_eq!(p("-2^2").eval(0.0, 0.0, 0.0).unwrap(), -4.0);
        assert_eq!(p("1 - 2 - 3").eval(0.0, 0.0, 0.0).unwrap(), -4.0);
        assert_eq!(p("8 / 4 / 2").eval(0.0, 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(p("2 + 3 * 4").eval(0.0, 0.0, 0.0).unwrap(), 14.0);
        assert_eq!(p("2 * -3").eval(0.0, 0.0, 0.0).unwrap(), -6.0);
        assert_eq!(p("(1+1)^3").eval(0.0, 0.0, 0.0).unwrap(), 8.0);
        assert_eq!(p("1.5e1 + .5").eval(0.0, 0.0, 0.0).unwrap(), 15.5);
        assert!((p("pi").eval(0.0, 0.0, 0.0).unwrap() - PI).abs() == 0.0);
    }

    #[test]
    fn powers() {
        let e = p("u^2");
        assert_eq!(e.eval(0.0, -3.0, 0.0).unwrap(), 9.0);
        assert_eq!(p("u^0").eval(0.0, 5.0, 0.0).unwrap(), 1.0);
        assert_eq!(p("u^(-2)").eval(0.0, 2.0, 0.0).unwrap(), 0.25);
        assert!((p("u^1.5").eval(0.0, 4.0, 0.0).unwrap() - 8.0).abs() < 1e-12);
        assert!((p("s^(2*pi/pi)").eval(3.0, 0.0, 0.0).unwrap() - 9.0).abs() < 1e-12);
        assert!(p("u^0.5").eval(0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn parse_errors() {
        let err = parse("s + $").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedChar('$')));

        let err = parse("2*w").unwrap_err();
        assert_eq!(err, ParseError { kind: ParseErrorKind::UnknownIdentifier("w".into()), offset: 2 });

        let err = parse("u^v").unwrap_err();
        assert_eq!(err, ParseError { kind: ParseErrorKind::NonConstantExponent, offset: 2 });

        assert!(matches!(parse("sin s").unwrap_err().kind, ParseErrorKind::MissingParenthesis(_)));
        assert_eq!(parse("(s + 1").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        assert!(matches!(parse("s s").unwrap_err().kind, ParseErrorKind::UnexpectedToken(_)));
        assert_eq!(parse("").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        assert!(matches!(parse("1.2.3").unwrap_err().kind, ParseErrorKind::InvalidNumber(_)));
    }

    #[test]
    fn derivative_of_cosine() {
        let d = p("cos(s)").diff(Var::S);
        assert_eq!(d, Expr::neg(Expr::unary(UnaryOp::Sin, Expr::Var(Var::S))));
        let d4 = p("cos(s)").diff_n(Var::S, 4);
        for k in 0..10 {
            let s = 0.37 * k as f64;
            assert!((d4.eval(s, 0.0, 0.0).unwrap() - s.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn partial_derivative_in_u() {
        let d = p("(u - 1)*v^2").diff(Var::U);
        for &(u, v) in &[(0.0, 1.0), (2.0, -3.0), (0.5, 0.25)] {
            assert!((d.eval(0.0, u, v).unwrap() - v * v).abs() < 1e-15);
        }
        assert!(!d.uses(Var::U));
    }

    #[test]
    fn evaluation_examples() {
        assert!((p("sqrt(2)*sin(s)").eval(FRAC_PI_2, 0.0, 0.0).unwrap() - SQRT_2).abs() < 1e-15);
        assert_eq!(p("s*(u-1)").eval(PI, 1.0, 0.0).unwrap(), 0.0);
        let got = p("(s+u)*(v-0)").eval(2.0 * PI, 0.5, 0.25).unwrap();
        assert!((got - (2.0 * PI + 0.5) * 0.25).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let err = p("1 + ln(s - 1)").eval(0.5, 0.0, 0.0).unwrap_err();
        assert!(matches!(err.kind, DomainErrorKind::LogOfNonPositive(_)));
        assert!(err.subexpr.contains("ln"), "{}", err.subexpr);

        let err = p("sqrt(u)").eval(0.0, -1.0, 0.0).unwrap_err();
        assert!(matches!(err.kind, DomainErrorKind::SqrtOfNegative(_)));

        let err = p("1/(v - 2)").eval(0.0, 0.0, 2.0).unwrap_err();
        assert_eq!(err.kind, DomainErrorKind::DivisionByZero);

        let err = p("exp(s)").eval(1000.0, 0.0, 0.0).unwrap_err();
        assert_eq!(err.kind, DomainErrorKind::NonFinite);
    }

    #[test]
    fn folding_keeps_undefined_constants() {
        let e = p("ln(0 - 1) + s");
        assert!(e.eval(1.0, 0.0, 0.0).is_err());
        assert_eq!(p("2*3 + 0*s + 1*u").to_string(), "(6 + u)");
    }

    #[test]
    fn printed_form_reparses() {
        for src in ["-s^3 + 2.5*u/v", "sin(-u)*exp(0.1*s) - sqrt(v)", "(-3.25)*tan(s)"] {
            let e = p(src);
            assert_eq!(p(&e.to_string()), e, "{src} -> {e}");
        }
    }
}
