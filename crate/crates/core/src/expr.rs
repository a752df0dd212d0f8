//! The scalar-field expression language.
//!
//! Fields on a chart are written in coordinates `z1..zm` and their formal
//! conjugates `zb1..zbm`, combined with `+ - * / ^`, integer powers, `log`,
//! `exp`, parentheses and complex literals (`2`, `0.5`, `1e-3`, `2i`, `i`).
//! Parsing produces an AST; evaluation propagates jets through the AST, so a
//! field's Taylor coefficients at a point are exact for this function class
//! up to floating-point rounding. No symbolic differentiation happens
//! anywhere: derivatives are read off jets.

use std::fmt;
use std::rc::Rc;

use num_complex::Complex64;
use thiserror::Error;

use crate::jet::{Dir, Jet, JetError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unknown identifier `{name}` at {line}:{col}")]
    UnknownIdentifier { line: usize, col: usize, name: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("variable {name} exceeds chart dimension {m}")]
    VariableOutOfRange { name: String, m: usize },
    #[error("{op} of a jet with zero constant term")]
    Singular { op: &'static str },
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    /// `z<k>`, one-based coordinate index.
    Z(usize),
    /// `zb<k>`, one-based coordinate index.
    Zbar(usize),
    Neg(Rc<Expr>),
    Add(Rc<Expr>, Rc<Expr>),
    Sub(Rc<Expr>, Rc<Expr>),
    Mul(Rc<Expr>, Rc<Expr>),
    Div(Rc<Expr>, Rc<Expr>),
    Pow(Rc<Expr>, i64),
    Log(Rc<Expr>),
    Exp(Rc<Expr>),
}

impl Expr {
    /// Largest coordinate index mentioned, or 0 for constant expressions.
    pub fn max_var_index(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Z(k) | Expr::Zbar(k) => *k,
            Expr::Neg(a) | Expr::Log(a) | Expr::Exp(a) => a.max_var_index(),
            Expr::Pow(a, _) => a.max_var_index(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var_index().max(b.max_var_index())
            }
        }
    }

    /// Evaluate as a jet at the point with coordinates `coords`
    /// (the center values of `z1..zm`; `zbk` expands around the conjugate of
    /// `coords[k-1]`).
    pub fn eval_jet(&self, coords: &[Complex64], depth: usize) -> Result<Jet, EvalError> {
        let m = coords.len();
        match self {
            Expr::Const(c) => Ok(Jet::constant(m, depth, *c)),
            Expr::Z(k) => {
                if *k == 0 || *k > m {
                    return Err(EvalError::VariableOutOfRange { name: format!("z{k}"), m });
                }
                Ok(Jet::coordinate(m, depth, Dir::Holo(k - 1), coords[k - 1])?)
            }
            Expr::Zbar(k) => {
                if *k == 0 || *k > m {
                    return Err(EvalError::VariableOutOfRange { name: format!("zb{k}"), m });
                }
                Ok(Jet::coordinate(m, depth, Dir::AntiHolo(k - 1), coords[k - 1].conj())?)
            }
            Expr::Neg(a) => Ok(a.eval_jet(coords, depth)?.scale(Complex64::new(-1.0, 0.0))),
            Expr::Add(a, b) => Ok(a.eval_jet(coords, depth)?.checked_add(&b.eval_jet(coords, depth)?)?),
            Expr::Sub(a, b) => Ok(a.eval_jet(coords, depth)?.checked_sub(&b.eval_jet(coords, depth)?)?),
            Expr::Mul(a, b) => Ok(a.eval_jet(coords, depth)?.checked_mul(&b.eval_jet(coords, depth)?)?),
            Expr::Div(a, b) => {
                let denom = b.eval_jet(coords, depth)?;
                let inv = denom.recip().map_err(|e| match e {
                    JetError::SingularConstantTerm => EvalError::Singular { op: "division" },
                    other => EvalError::Jet(other),
                })?;
                Ok(a.eval_jet(coords, depth)?.checked_mul(&inv)?)
            }
            Expr::Pow(a, n) => {
                let base = a.eval_jet(coords, depth)?;
                base.powi(*n).map_err(|e| match e {
                    JetError::SingularConstantTerm => EvalError::Singular { op: "negative power" },
                    other => EvalError::Jet(other),
                })
            }
            Expr::Log(a) => {
                let inner = a.eval_jet(coords, depth)?;
                inner.ln().map_err(|e| match e {
                    JetError::SingularConstantTerm => EvalError::Singular { op: "log" },
                    other => EvalError::Jet(other),
                })
            }
            Expr::Exp(a) => Ok(a.eval_jet(coords, depth)?.exp()?),
        }
    }
}

fn write_complex(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 {
        write!(f, "{}i", c.im)
    } else if c.im < 0.0 {
        write!(f, "({}-{}i)", c.re, -c.im)
    } else {
        write!(f, "({}+{}i)", c.re, c.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn needs_parens(e: &Expr, parent_mul: bool) -> bool {
            match e {
                Expr::Add(..) | Expr::Sub(..) | Expr::Neg(..) => parent_mul,
                _ => false,
            }
        }
        fn atom(e: &Expr, f: &mut fmt::Formatter<'_>, parent_mul: bool) -> fmt::Result {
            if needs_parens(e, parent_mul) {
                write!(f, "(")?;
                write!(f, "{e}")?;
                write!(f, ")")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Const(c) => write_complex(f, *c),
            Expr::Z(k) => write!(f, "z{k}"),
            Expr::Zbar(k) => write!(f, "zb{k}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                atom(a, f, true)
            }
            Expr::Add(a, b) => write!(f, "{a} + {b}"),
            Expr::Sub(a, b) => {
                write!(f, "{a} - ")?;
                atom(b, f, true)
            }
            Expr::Mul(a, b) => {
                atom(a, f, true)?;
                write!(f, "*")?;
                atom(b, f, true)
            }
            Expr::Div(a, b) => {
                atom(a, f, true)?;
                write!(f, "/")?;
                match **b {
                    Expr::Const(_) | Expr::Z(_) | Expr::Zbar(_) => write!(f, "{b}"),
                    _ => write!(f, "({b})"),
                }
            }
            Expr::Pow(a, n) => {
                match **a {
                    Expr::Const(_) | Expr::Z(_) | Expr::Zbar(_) => write!(f, "{a}")?,
                    _ => write!(f, "({a})")?,
                }
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(input: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => advance(1, &mut i, &mut col),
            '+' => {
                tokens.push(Token { tok: Tok::Plus, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            '-' => {
                tokens.push(Token { tok: Tok::Minus, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            '*' => {
                tokens.push(Token { tok: Tok::Star, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            '/' => {
                tokens.push(Token { tok: Tok::Slash, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            '^' => {
                tokens.push(Token { tok: Tok::Caret, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            '(' => {
                tokens.push(Token { tok: Tok::LParen, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            ')' => {
                tokens.push(Token { tok: Tok::RParen, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // scientific exponent, only when digits follow
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    line: tline,
                    col: tcol,
                    message: format!("malformed number `{text}`"),
                })?;
                let imaginary = i < chars.len() && chars[i] == 'i' && !ident_continues(&chars, i + 1);
                if imaginary {
                    i += 1;
                }
                col += i - start;
                tokens.push(Token { tok: Tok::Num(value, imaginary), line: tline, col: tcol });
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                tokens.push(Token { tok: Tok::Ident(text), line: tline, col: tcol });
            }
            other => {
                return Err(ParseError::Syntax {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    tokens.push(Token { tok: Tok::Eof, line, col });
    Ok(tokens)
}

fn ident_continues(chars: &[char], i: usize) -> bool {
    i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError::Syntax { line: t.line, col: t.col, message: message.into() }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    acc = Expr::Add(Rc::new(acc), Rc::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    acc = Expr::Sub(Rc::new(acc), Rc::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    acc = Expr::Mul(Rc::new(acc), Rc::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    acc = Expr::Div(Rc::new(acc), Rc::new(self.factor()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if matches!(self.peek().tok, Tok::Caret) {
            self.bump();
            let negative = if matches!(self.peek().tok, Tok::Minus) {
                self.bump();
                true
            } else {
                false
            };
            match self.bump().tok {
                Tok::Num(v, false) if v.fract() == 0.0 => {
                    let n = v as i64;
                    return Ok(Expr::Pow(Rc::new(base), if negative { -n } else { n }));
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.error("exponent must be an integer literal"));
                }
            }
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek().tok, Tok::Minus) {
            self.bump();
            return Ok(Expr::Neg(Rc::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v, imaginary) => Ok(Expr::Const(if imaginary {
                Complex64::new(0.0, v)
            } else {
                Complex64::new(v, 0.0)
            })),
            Tok::Ident(name) => {
                if name == "i" {
                    return Ok(Expr::Const(Complex64::new(0.0, 1.0)));
                }
                if name == "log" || name == "exp" {
                    if !matches!(self.peek().tok, Tok::LParen) {
                        return Err(self.error(format!("`{name}` requires a parenthesized argument")));
                    }
                    self.bump();
                    let inner = self.expr()?;
                    if !matches!(self.peek().tok, Tok::RParen) {
                        return Err(self.error("expected `)`"));
                    }
                    self.bump();
                    return Ok(if name == "log" {
                        Expr::Log(Rc::new(inner))
                    } else {
                        Expr::Exp(Rc::new(inner))
                    });
                }
                if let Some(rest) = name.strip_prefix("zb") {
                    if let Ok(k) = rest.parse::<usize>() {
                        if k >= 1 {
                            return Ok(Expr::Zbar(k));
                        }
                    }
                } else if let Some(rest) = name.strip_prefix('z') {
                    if let Ok(k) = rest.parse::<usize>() {
                        if k >= 1 {
                            return Ok(Expr::Z(k));
                        }
                    }
                }
                Err(ParseError::UnknownIdentifier { line: t.line, col: t.col, name })
            }
            Tok::LParen => {
                let inner = self.expr()?;
                if !matches!(self.peek().tok, Tok::RParen) {
                    return Err(self.error("expected `)`"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Eof => {
                self.pos -= 1;
                Err(self.error("unexpected end of input"))
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected a value"))
            }
        }
    }
}

/// A scalar field: a parsed expression plus its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    ast: Expr,
    source: String,
}

impl ScalarField {
    pub fn from_ast(ast: Expr) -> ScalarField {
        let source = ast.to_string();
        ScalarField { ast, source }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn max_var_index(&self) -> usize {
        self.ast.max_var_index()
    }

    pub fn eval_jet(&self, coords: &[Complex64], depth: usize) -> Result<Jet, EvalError> {
        self.ast.eval_jet(coords, depth)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// Parse an expression in the field grammar.
pub fn parse_expression(input: &str) -> Result<ScalarField, ParseError> {
    let tokens = lex(input)?;
    let mut parser = Parser { tokens, pos: 0 };
    let ast = parser.expr()?;
    if !matches!(parser.peek().tok, Tok::Eof) {
        return Err(parser.error("trailing input after expression"));
    }
    Ok(ScalarField { ast, source: input.trim().to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_and_evaluates_polynomials() {
        let f = parse_expression("z1^2*zb1 + 2*z1 - 0.5").unwrap();
        let jet = f.eval_jet(&[c(1.0, 0.0)], 3).unwrap();
        // 1*1 + 2 - 0.5 = 2.5
        assert!((jet.eval_center() - c(2.5, 0.0)).norm() < 1e-15);
        // d/dz (z^2 zb + 2z) = 2 z zb + 2 -> 4 at z=1
        let dz = jet.derive(crate::jet::Dir::Holo(0)).unwrap();
        assert!((dz.eval_center() - c(4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_expression("z1 + * 2").unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => {
                assert_eq!(line, 1);
                assert_eq!(col, 6);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_is_reported() {
        let err = parse_expression("z1 + w2").unwrap_err();
        match err {
            ParseError::UnknownIdentifier { name, col, .. } => {
                assert_eq!(name, "w2");
                assert_eq!(col, 6);
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }

    #[test]
    fn complex_literals() {
        let f = parse_expression("2i*z1 + (1+0.5i)").unwrap();
        let jet = f.eval_jet(&[c(1.0, 0.0)], 0).unwrap();
        assert!((jet.eval_center() - c(1.0, 2.5)).norm() < 1e-15);
        let g = parse_expression("i").unwrap();
        assert_eq!(g.eval_jet(&[], 0).unwrap().eval_center(), c(0.0, 1.0));
    }

    #[test]
    fn log_exp_chain() {
        let f = parse_expression("log(1 + z1*zb1)").unwrap();
        let p = c(0.3, 0.1);
        let jet = f.eval_jet(&[p], 2).unwrap();
        let expected = (1.0 + p.norm_sqr()).ln();
        assert!((jet.eval_center() - c(expected, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn division_by_vanishing_field_fails() {
        let f = parse_expression("1/z1").unwrap();
        let err = f.eval_jet(&[c(0.0, 0.0)], 1).unwrap_err();
        assert!(matches!(err, EvalError::Singular { op: "division" }));
    }

    #[test]
    fn variable_beyond_dimension_fails() {
        let f = parse_expression("z2").unwrap();
        let err = f.eval_jet(&[c(0.0, 0.0)], 1).unwrap_err();
        assert!(matches!(err, EvalError::VariableOutOfRange { m: 1, .. }));
    }

    #[test]
    fn negative_and_integer_powers() {
        let f = parse_expression("(1 - z1*zb1)^-2").unwrap();
        let p = c(0.3, 0.1);
        let jet = f.eval_jet(&[p], 2).unwrap();
        let expected = (1.0 - p.norm_sqr()).powi(-2);
        assert!((jet.eval_center() - c(expected, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn display_round_trips_through_parser() {
        let f = parse_expression("-z1^2*zb1 + 2/(1 + z1) - exp(z1)").unwrap();
        let g = parse_expression(&f.ast().to_string()).unwrap();
        let p = [c(0.2, -0.3)];
        let a = f.eval_jet(&p, 3).unwrap();
        let b = g.eval_jet(&p, 3).unwrap();
        assert!(a.checked_sub(&b).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn pow_binds_tighter_than_mul() {
        let f = parse_expression("2*z1^2").unwrap();
        let jet = f.eval_jet(&[c(3.0, 0.0)], 0).unwrap();
        assert_eq!(jet.eval_center(), c(18.0, 0.0));
    }
}
