//! Canonical polynomial form in `v` and `conj(v)`.
//!
//! A [`Poly`] is a sum of monomials `c * prod_j v_j^alpha_j * conj(v_j)^beta_j`
//! keyed by `(alpha, beta)`. Rotating the argument, `v -> Phi_{-w} v`,
//! multiplies a monomial by `exp(i (beta - alpha) . w)`, so torus averages
//! reduce to selecting monomials by their exponent difference.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::expr::{FieldExpr, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponents {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
}

impl Exponents {
    fn zero(n: usize) -> Self {
        Self { alpha: vec![0; n], beta: vec![0; n] }
    }

    pub fn degree(&self) -> u32 {
        self.alpha.iter().chain(&self.beta).sum()
    }

    /// `alpha - beta`, the phase winding of the monomial.
    pub fn winding(&self) -> Vec<i64> {
        self.alpha.iter().zip(&self.beta).map(|(&a, &b)| a as i64 - b as i64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: Complex64,
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Exponents, Complex64>,
}

/// One polynomial per component of a vector field.
pub type PolyField = Vec<Poly>;

impl Poly {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        let mut p = Self::zero(n);
        p.push(Exponents::zero(n), c);
        p
    }

    pub fn var(n: usize, k: usize) -> Self {
        let mut e = Exponents::zero(n);
        e.alpha[k] = 1;
        let mut p = Self::zero(n);
        p.push(e, Complex64::new(1.0, 0.0));
        p
    }

    pub fn conj_var(n: usize, k: usize) -> Self {
        Self::var(n, k).conj()
    }

    pub fn from_monomials(n: usize, monomials: impl IntoIterator<Item = Monomial>) -> Result<Self> {
        let mut p = Self::zero(n);
        for m in monomials {
            if m.alpha.len() != n || m.beta.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: m.alpha.len() });
            }
            p.push(Exponents { alpha: m.alpha, beta: m.beta }, m.coeff);
        }
        Ok(p)
    }

    fn push(&mut self, e: Exponents, c: Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        match self.terms.entry(e) {
            Entry::Vacant(slot) => {
                if c != zero {
                    slot.insert(c);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == zero {
                    slot.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Complex64)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.terms
            .iter()
            .map(|(e, c)| Monomial { coeff: *c, alpha: e.alpha.clone(), beta: e.beta.clone() })
            .collect()
    }

    pub fn coeff(&self, alpha: &[u32], beta: &[u32]) -> Complex64 {
        let key = Exponents { alpha: alpha.to_vec(), beta: beta.to_vec() };
        self.terms.get(&key).copied().unwrap_or_default()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Exponents::degree).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.push(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        let mut out = Poly::zero(self.n);
        for (e, c) in &self.terms {
            out.push(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let alpha = e1.alpha.iter().zip(&e2.alpha).map(|(a, b)| a + b).collect();
                let beta = e1.beta.iter().zip(&e2.beta).map(|(a, b)| a + b).collect();
                out.push(Exponents { alpha, beta }, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::constant(self.n, Complex64::new(1.0, 0.0));
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Complex conjugate: swaps alpha and beta and conjugates coefficients.
    pub fn conj(&self) -> Poly {
        let mut out = Poly::zero(self.n);
        for (e, c) in &self.terms {
            out.push(Exponents { alpha: e.beta.clone(), beta: e.alpha.clone() }, c.conj());
        }
        out
    }

    /// Wirtinger derivative with respect to `conj(v_k)`.
    pub fn d_dvbar(&self, k: usize) -> Poly {
        let mut out = Poly::zero(self.n);
        for (e, c) in &self.terms {
            if e.beta[k] > 0 {
                let mut e2 = e.clone();
                e2.beta[k] -= 1;
                out.push(e2, c * e.beta[k] as f64);
            }
        }
        out
    }

    /// Wirtinger derivative with respect to `v_k`.
    pub fn d_dv(&self, k: usize) -> Poly {
        let mut out = Poly::zero(self.n);
        for (e, c) in &self.terms {
            if e.alpha[k] > 0 {
                let mut e2 = e.clone();
                e2.alpha[k] -= 1;
                out.push(e2, c * e.alpha[k] as f64);
            }
        }
        out
    }

    /// Keeps only the monomials whose winding `alpha - beta` equals `target`.
    pub fn select_winding(&self, target: &[i64]) -> Poly {
        let mut out = Poly::zero(self.n);
        for (e, c) in &self.terms {
            if e.winding() == target {
                out.terms.insert(e.clone(), *c);
            }
        }
        out
    }

    /// Largest defect `|c(alpha,beta) - conj(c(beta,alpha))|`; zero iff the
    /// polynomial is real-valued.
    pub fn conjugate_pairing_defect(&self) -> f64 {
        self.sub(&self.conj()).terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, v: &[Complex64]) -> Complex64 {
        debug_assert_eq!(v.len(), self.n);
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for j in 0..self.n {
                if e.alpha[j] > 0 {
                    t *= v[j].powu(e.alpha[j]);
                }
                if e.beta[j] > 0 {
                    t *= v[j].conj().powu(e.beta[j]);
                }
            }
            acc += t;
        }
        acc
    }

    /// Expression tree with the same value; pairs of `v_j conj(v_j)` are written as `abs2(vj)`.
    pub fn to_expr(&self) -> FieldExpr {
        let mut root: Option<Node> = None;
        for (e, c) in &self.terms {
            let mut term = coeff_node(*c);
            for j in 0..self.n {
                let common = e.alpha[j].min(e.beta[j]);
                for (node, count) in [
                    (Node::Abs2(j), common),
                    (Node::Var(j), e.alpha[j] - common),
                    (Node::ConjVar(j), e.beta[j] - common),
                ] {
                    if count == 1 {
                        term = Node::Mul(Box::new(term), Box::new(node));
                    } else if count > 1 {
                        term = Node::Mul(Box::new(term), Box::new(Node::Pow(Box::new(node), count)));
                    }
                }
            }
            root = Some(match root {
                None => term,
                Some(r) => Node::Add(Box::new(r), Box::new(term)),
            });
        }
        FieldExpr::from_node(root.unwrap_or(Node::Num(0.0)), self.n)
            .expect("polynomial variables are in range")
    }

    /// Human-readable monomial list using `prefix` as variable name (`v`, `a`, ...),
    /// lowest total degree first.
    pub fn pretty(&self, prefix: &str) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|(e, _)| e.degree());
        let mut out = String::new();
        for (idx, (e, c)) in terms.into_iter().enumerate() {
            let coeff = fmt_coeff(*c);
            let mut factors = Vec::new();
            for j in 0..self.n {
                let common = e.alpha[j].min(e.beta[j]);
                push_factor(&mut factors, format!("|{prefix}{}|^2", j + 1), common);
                push_factor(&mut factors, format!("{prefix}{}", j + 1), e.alpha[j] - common);
                push_factor(&mut factors, format!("conj({prefix}{})", j + 1), e.beta[j] - common);
            }
            let body = match (coeff.as_str(), factors.is_empty()) {
                (_, true) => coeff.clone(),
                ("1", false) => factors.join("*"),
                ("-1", false) => format!("-{}", factors.join("*")),
                _ => format!("{coeff}*{}", factors.join("*")),
            };
            if idx == 0 {
                out.push_str(&body);
            } else if let Some(rest) = body.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&body);
            }
        }
        out
    }
}

fn push_factor(factors: &mut Vec<String>, name: String, count: u32) {
    match count {
        0 => {}
        1 => factors.push(name),
        k => factors.push(format!("{name}^{k}")),
    }
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn fmt_coeff(c: Complex64) -> String {
    match (c.re == 0.0, c.im == 0.0) {
        (_, true) => fmt_num(c.re),
        (true, false) if c.im == 1.0 => "i".into(),
        (true, false) if c.im == -1.0 => "-i".into(),
        (true, false) => format!("{}i", fmt_num(c.im)),
        _ => format!("({}{:+}i)", fmt_num(c.re), c.im),
    }
}

fn coeff_node(c: Complex64) -> Node {
    match (c.re == 0.0, c.im == 0.0) {
        (_, true) => Node::Num(c.re),
        (true, false) => Node::Mul(Box::new(Node::Num(c.im)), Box::new(Node::Imag)),
        _ => Node::Add(
            Box::new(Node::Num(c.re)),
            Box::new(Node::Mul(Box::new(Node::Num(c.im)), Box::new(Node::Imag))),
        ),
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty("v"))
    }
}

fn node_to_poly(node: &Node, n: usize) -> Result<Poly> {
    Ok(match node {
        Node::Var(k) => Poly::var(n, *k),
        Node::ConjVar(k) => Poly::conj_var(n, *k),
        Node::Abs2(k) => Poly::var(n, *k).mul(&Poly::conj_var(n, *k)),
        Node::Abs(k) => {
            return Err(Error::NonPolynomial(format!("abs(v{}) has no polynomial form", k + 1)))
        }
        Node::Imag => Poly::constant(n, Complex64::i()),
        Node::Num(x) => {
            if *x == 0.0 {
                Poly::zero(n)
            } else {
                Poly::constant(n, Complex64::new(*x, 0.0))
            }
        }
        Node::Add(a, b) => node_to_poly(a, n)?.add(&node_to_poly(b, n)?),
        Node::Sub(a, b) => node_to_poly(a, n)?.sub(&node_to_poly(b, n)?),
        Node::Mul(a, b) => node_to_poly(a, n)?.mul(&node_to_poly(b, n)?),
        Node::Neg(a) => node_to_poly(a, n)?.neg(),
        Node::Pow(a, k) => node_to_poly(a, n)?.pow(*k),
    })
}

/// Expands an expression into canonical monomial form.
pub fn to_polynomial(expr: &FieldExpr) -> Result<Poly> {
    node_to_poly(expr.root(), expr.dim())
}

/// A field compiled for fast repeated evaluation: the polynomial form when
/// available, otherwise the expression tree.
#[derive(Debug, Clone)]
pub enum CompiledExpr {
    Poly(Poly),
    Tree(FieldExpr),
}

impl CompiledExpr {
    pub fn new(expr: &FieldExpr) -> Self {
        match to_polynomial(expr) {
            Ok(p) => CompiledExpr::Poly(p),
            Err(_) => CompiledExpr::Tree(expr.clone()),
        }
    }

    pub fn eval(&self, v: &[Complex64]) -> Complex64 {
        match self {
            CompiledExpr::Poly(p) => p.eval(v),
            CompiledExpr::Tree(e) => e.eval(v),
        }
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        match self {
            CompiledExpr::Poly(p) => Some(p),
            CompiledExpr::Tree(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expr::parse_field_expr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect()
    }

    #[test]
    fn cubic_self_interaction_is_single_monomial() {
        let p = to_polynomial(&parse_field_expr("abs2(v1)*v1", 1).unwrap()).unwrap();
        assert_eq!(p.monomials(), vec![Monomial { coeff: Complex64::new(1.0, 0.0), alpha: vec![2], beta: vec![1] }]);
    }

    #[test]
    fn cancellation_prunes_everything() {
        let p = to_polynomial(&parse_field_expr("v1 - v1", 1).unwrap()).unwrap();
        assert!(p.is_zero());
        let p = to_polynomial(&parse_field_expr("0*v1 + 0", 1).unwrap()).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn binomial_expansion_matches_direct_evaluation() {
        let e = parse_field_expr("(v1+cv2)^2", 2).unwrap();
        let p = to_polynomial(&e).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.coeff(&[2, 0], &[0, 0]), Complex64::new(1.0, 0.0));
        assert_eq!(p.coeff(&[1, 0], &[0, 1]), Complex64::new(2.0, 0.0));
        assert_eq!(p.coeff(&[0, 0], &[0, 2]), Complex64::new(1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..64 {
            let v = random_point(&mut rng, 2);
            let direct = e.eval(&v);
            assert!((p.eval(&v) - direct).norm() <= 1e-10 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn abs_is_not_polynomial() {
        let e = parse_field_expr("v1*abs(v1)", 1).unwrap();
        assert!(matches!(to_polynomial(&e), Err(Error::NonPolynomial(_))));
        assert!(matches!(CompiledExpr::new(&e), CompiledExpr::Tree(_)));
    }

    #[test]
    fn wirtinger_derivatives_follow_power_rule() {
        let p = to_polynomial(&parse_field_expr("abs2(v1)^2", 1).unwrap()).unwrap();
        let d = p.d_dvbar(0);
        assert_eq!(d.coeff(&[2], &[1]), Complex64::new(2.0, 0.0));
        let d = p.d_dv(0);
        assert_eq!(d.coeff(&[1], &[2]), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn pairing_defect_detects_non_real() {
        let real = to_polynomial(&parse_field_expr("v1^2 + cv1^2 + abs2(v1)", 1).unwrap()).unwrap();
        assert_eq!(real.conjugate_pairing_defect(), 0.0);
        let not_real = to_polynomial(&parse_field_expr("v1^2", 1).unwrap()).unwrap();
        assert!(not_real.conjugate_pairing_defect() > 0.5);
    }

    #[test]
    fn to_expr_and_pretty() {
        let e = parse_field_expr("-v1 + i*v1*abs2(v2) + 2*cv2^3", 2).unwrap();
        let p = to_polynomial(&e).unwrap();
        let back = to_polynomial(&p.to_expr()).unwrap();
        assert_eq!(p, back);
        let s = p.pretty("a");
        assert!(s.starts_with("-a1 + "), "{s}");
        assert!(s.contains("i*a1*|a2|^2"), "{s}");
        assert!(s.contains("2*conj(a2)^3"), "{s}");
    }
}
