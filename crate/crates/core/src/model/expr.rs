//! Expression language for drift components, dispersion entries and Hamiltonians.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := base ('^' uint)?
//! base   := 'v'uint | 'cv'uint | 'i' | number
//!         | 'abs2(' 'v'uint ')' | 'abs(' 'v'uint ')'
//!         | '(' expr ')' | '-' base
//! ```
//!
//! `vK` is the K-th complex coordinate (1-based), `cvK` its conjugate and
//! `abs2(vK)` is `|vK|^2`. Unary minus binds tighter than `^`, so `-v1^2`
//! reads as `(-v1)^2`. `abs(vK)` is an extension outside the polynomial
//! fragment; expressions using it can only be averaged by quadrature.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_EXPONENT: u32 = 64;

/// Expression tree node. Variable indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Var(usize),
    ConjVar(usize),
    Abs2(usize),
    Abs(usize),
    Imag,
    Num(f64),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, u32),
}

impl Node {
    pub fn eval(&self, v: &[Complex64]) -> Complex64 {
        match self {
            Node::Var(k) => v[*k],
            Node::ConjVar(k) => v[*k].conj(),
            Node::Abs2(k) => Complex64::new(v[*k].norm_sqr(), 0.0),
            Node::Abs(k) => Complex64::new(v[*k].norm(), 0.0),
            Node::Imag => Complex64::i(),
            Node::Num(x) => Complex64::new(*x, 0.0),
            Node::Add(a, b) => a.eval(v) + b.eval(v),
            Node::Sub(a, b) => a.eval(v) - b.eval(v),
            Node::Mul(a, b) => a.eval(v) * b.eval(v),
            Node::Neg(a) => -a.eval(v),
            Node::Pow(a, k) => a.eval(v).powu(*k),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Var(k) | Node::ConjVar(k) | Node::Abs2(k) | Node::Abs(k) => Some(*k),
            Node::Imag | Node::Num(_) => None,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Node::Neg(a) | Node::Pow(a, _) => a.max_var(),
        }
    }

    fn is_polynomial(&self) -> bool {
        match self {
            Node::Abs(_) => false,
            Node::Var(_) | Node::ConjVar(_) | Node::Abs2(_) | Node::Imag | Node::Num(_) => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => {
                a.is_polynomial() && b.is_polynomial()
            }
            Node::Neg(a) | Node::Pow(a, _) => a.is_polynomial(),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Var(k) => write!(f, "v{}", k + 1),
            Node::ConjVar(k) => write!(f, "cv{}", k + 1),
            Node::Abs2(k) => write!(f, "abs2(v{})", k + 1),
            Node::Abs(k) => write!(f, "abs(v{})", k + 1),
            Node::Imag => write!(f, "i"),
            Node::Num(x) if x.is_sign_negative() => write!(f, "(-{:?})", -x),
            Node::Num(x) => write!(f, "{x:?}"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Pow(a, k) => write!(f, "({a}^{k})"),
        }
    }
}

/// A parsed expression over `n` complex variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExpr {
    n: usize,
    root: Node,
}

impl FieldExpr {
    /// Wraps a node tree, checking that all variable indices are below `n`.
    pub fn from_node(root: Node, n: usize) -> Result<Self> {
        if let Some(k) = root.max_var() {
            if k >= n {
                return Err(Error::VariableOutOfRange { index: k + 1, n });
            }
        }
        Ok(Self { n, root })
    }

    pub fn constant(value: Complex64, n: usize) -> Self {
        let re = Node::Num(value.re);
        let root = if value.im == 0.0 {
            re
        } else {
            Node::Add(
                Box::new(re),
                Box::new(Node::Mul(Box::new(Node::Num(value.im)), Box::new(Node::Imag))),
            )
        };
        Self { n, root }
    }

    pub fn zero(n: usize) -> Self {
        Self { n, root: Node::Num(0.0) }
    }

    pub fn parse(text: &str, n: usize) -> Result<Self> {
        parse_field_expr(text, n)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn eval(&self, v: &[Complex64]) -> Complex64 {
        debug_assert_eq!(v.len(), self.n);
        self.root.eval(v)
    }

    /// True when the expression references no variable.
    pub fn is_literal(&self) -> bool {
        self.root.max_var().is_none()
    }

    pub fn is_polynomial(&self) -> bool {
        self.root.is_polynomial()
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    UInt(u64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
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
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                let mut integral = true;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'.' {
                    integral = false;
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        integral = false;
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let lit = &text[start..j];
                let tok = if integral {
                    lit.parse::<u64>().map(Tok::UInt).map_err(|_| Error::Syntax {
                        pos: start,
                        msg: format!("bad integer literal `{lit}`"),
                    })?
                } else {
                    let x = lit.parse::<f64>().map_err(|_| Error::Syntax {
                        pos: start,
                        msg: format!("bad number `{lit}`"),
                    })?;
                    Tok::Num(x)
                };
                out.push((tok, start));
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_alphabetic() {
                    j += 1;
                }
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                out.push((Tok::Ident(text[start..j].to_string()), start));
                i = j;
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", text[start..].chars().next().unwrap()),
                })
            }
        }
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    n: usize,
}

impl Parser {
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

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax { pos: self.pos(), msg: format!("expected {what}") })
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let pos = self.pos();
            match self.bump() {
                Tok::UInt(k) if k <= MAX_EXPONENT as u64 => Ok(Node::Pow(Box::new(base), k as u32)),
                Tok::UInt(k) => Err(Error::Syntax {
                    pos,
                    msg: format!("exponent {k} exceeds {MAX_EXPONENT}"),
                }),
                _ => Err(Error::Syntax { pos, msg: "expected unsigned integer exponent".into() }),
            }
        } else {
            Ok(base)
        }
    }

    fn var_index(&self, digits: &str, pos: usize) -> Result<usize> {
        let k: usize = digits.parse().map_err(|_| Error::Syntax {
            pos,
            msg: "expected variable index".into(),
        })?;
        if k == 0 || k > self.n {
            return Err(Error::VariableOutOfRange { index: k, n: self.n });
        }
        Ok(k - 1)
    }

    fn base(&mut self) -> Result<Node> {
        let pos = self.pos();
        match self.bump() {
            Tok::Minus => Ok(Node::Neg(Box::new(self.base()?))),
            Tok::Num(x) => Ok(Node::Num(x)),
            Tok::UInt(k) => Ok(Node::Num(k as f64)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(&name, pos),
            Tok::End => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
            t => Err(Error::Syntax { pos, msg: format!("unexpected token {t:?}") }),
        }
    }

    fn ident(&mut self, name: &str, pos: usize) -> Result<Node> {
        let letters: String = name.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
        let digits = &name[letters.len()..];
        match (letters.as_str(), digits.is_empty()) {
            ("i", true) => Ok(Node::Imag),
            ("v", false) => Ok(Node::Var(self.var_index(digits, pos)?)),
            ("cv", false) => Ok(Node::ConjVar(self.var_index(digits, pos)?)),
            _ if name == "abs2" || name == "abs" => {
                self.expect(Tok::LParen, "`(` after function name")?;
                let arg_pos = self.pos();
                let k = match self.bump() {
                    Tok::Ident(arg) if arg.starts_with('v') && arg.len() > 1 => {
                        self.var_index(&arg[1..], arg_pos)?
                    }
                    _ => {
                        return Err(Error::Syntax {
                            pos: arg_pos,
                            msg: format!("{name} takes a single variable vK"),
                        })
                    }
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(if name == "abs2" { Node::Abs2(k) } else { Node::Abs(k) })
            }
            _ => Err(Error::UnknownIdentifier { pos, name: name.to_string() }),
        }
    }
}

/// Parses `text` as an expression over `n` complex variables.
pub fn parse_field_expr(text: &str, n: usize) -> Result<FieldExpr> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, at: 0, n };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(Error::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(FieldExpr { n, root })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluates_mixed_product() {
        let e = parse_field_expr("i*v1*abs2(v2)", 2).unwrap();
        let val = e.eval(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(val, c(0.0, 4.0));
    }

    #[test]
    fn conjugate_sum_is_twice_real_part() {
        let e = parse_field_expr("v1 + cv1", 1).unwrap();
        assert_eq!(e.eval(&[c(3.0, 4.0)]), c(6.0, 0.0));
    }

    #[test]
    fn out_of_range_variable() {
        let err = parse_field_expr("v3", 2).unwrap_err();
        assert_eq!(err, Error::VariableOutOfRange { index: 3, n: 2 });
        assert!(parse_field_expr("v0", 2).is_err());
        assert!(parse_field_expr("abs2(v5)", 2).is_err());
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_field_expr("v1 + * v2", 2) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_field_expr("(v1", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_field_expr("v1 v1", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_field_expr("", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_field_expr("v1^1.5", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_field_expr("v1 # 2", 1), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unknown_identifier() {
        assert!(matches!(
            parse_field_expr("sin(v1)", 1),
            Err(Error::UnknownIdentifier { pos: 0, .. })
        ));
        assert!(matches!(parse_field_expr("x1", 1), Err(Error::UnknownIdentifier { .. })));
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        let e = parse_field_expr("-v1^2", 1).unwrap();
        assert_eq!(e.eval(&[c(0.0, 1.0)]), c(-1.0, 0.0));
        let e = parse_field_expr("-(v1^2)", 1).unwrap();
        assert_eq!(e.eval(&[c(0.0, 1.0)]), c(1.0, 0.0));
    }

    #[test]
    fn numbers_and_exponents() {
        let e = parse_field_expr("1.5e-1 * 2 + .5 - 3E2", 1).unwrap();
        assert!((e.eval(&[c(0.0, 0.0)]).re - (0.3 + 0.5 - 300.0)).abs() < 1e-12);
        let e = parse_field_expr("abs(v1)", 1).unwrap();
        assert!(!e.is_polynomial());
        assert_eq!(e.eval(&[c(3.0, 4.0)]), c(5.0, 0.0));
    }

    #[test]
    fn display_reparses() {
        let e = parse_field_expr("-2.5*v1^3*cv2 - (i + 1e-7)*abs2(v2)", 2).unwrap();
        let again = parse_field_expr(&e.to_string(), 2).unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn literal_detection() {
        assert!(parse_field_expr("(1 + i)*0.5", 2).unwrap().is_literal());
        assert!(!parse_field_expr("0*v1", 2).unwrap().is_literal());
    }
}
