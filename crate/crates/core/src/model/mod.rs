//! Domain types for a stochastically perturbed linear system
//! `dv_k + i eps^-1 lambda_k v_k dtau = P_k(v) dtau + sum_l Psi_kl(v) dbeta_l`.

pub mod config;
pub mod diagnostics;
pub mod expr;
pub mod poly;

use std::ops::Deref;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{complex_vec, ConfigFile};
pub use diagnostics::{
    check_ellipticity, check_nonresonance, estimate_growth, EllipticityReport, GrowthReport, NonresonanceReport,
};
pub use expr::{parse_field_expr, FieldExpr, Node};
pub use poly::{to_polynomial, CompiledExpr, Monomial, Poly, PolyField};

use crate::error::{Error, Result};

/// Frequencies `lambda_k` of the unperturbed rotation, all nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frequencies(Vec<f64>);

impl Frequencies {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidSystem("at least one frequency is required".into()));
        }
        if let Some((k, l)) = lambdas.iter().enumerate().find(|(_, l)| !(l.abs() > 1e-12) || !l.is_finite()) {
            return Err(Error::InvalidSystem(format!("frequency lambda_{} = {l} must be nonzero and finite", k + 1)));
        }
        Ok(Self(lambdas))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A finite vector in `C^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVec(Vec<Complex64>);

impl ComplexVec {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("complex vector has non-finite entries".into()));
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }

    pub fn from_reals(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.0.len() });
        }
        Ok(())
    }
}

impl Deref for ComplexVec {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// Which regularity regime the dispersion matrix falls in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PsiKind {
    /// `Psi` does not depend on `v`.
    Constant,
    /// `Psi Psi^* >= alpha E` for all `v`.
    Elliptic { alpha: f64 },
    /// `Psi` is a smooth function of `v`.
    Smooth,
}

/// Which drift the effective equation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftVariant {
    /// `P1 + P2`, including the hamiltonian part.
    Full,
    /// `P1` only.
    Modified,
}

/// One perturbed system: frequencies, time-scale separation, drift split into a
/// non-hamiltonian part and an optional Hamiltonian, and the dispersion matrix.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    freqs: Frequencies,
    epsilon: f64,
    p1: Vec<FieldExpr>,
    h: Option<FieldExpr>,
    psi: Vec<Vec<FieldExpr>>,
    psi_kind: PsiKind,
    m0: f64,
    hamiltonian_field: Vec<FieldExpr>,
}

/// Number of random points used to validate that `h` is real.
const REALITY_SAMPLES: usize = 64;

impl SystemSpec {
    pub fn new(
        freqs: Frequencies,
        epsilon: f64,
        p1: Vec<FieldExpr>,
        h: Option<FieldExpr>,
        psi: Vec<Vec<FieldExpr>>,
        psi_kind: PsiKind,
        m0: f64,
    ) -> Result<Self> {
        let n = freqs.len();
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidSystem(format!("epsilon = {epsilon} must lie in (0, 1]")));
        }
        if !(m0 >= 0.0) {
            return Err(Error::InvalidSystem(format!("m0 = {m0} must be nonnegative")));
        }
        if p1.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p1.len() });
        }
        if psi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: psi.len() });
        }
        let n1 = psi[0].len();
        if n1 == 0 {
            return Err(Error::InvalidSystem("dispersion needs at least one noise column".into()));
        }
        if let Some(row) = psi.iter().find(|r| r.len() != n1) {
            return Err(Error::DimensionMismatch { expected: n1, got: row.len() });
        }
        let all = p1.iter().chain(h.iter()).chain(psi.iter().flatten());
        if let Some(e) = all.clone().find(|e| e.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: e.dim() });
        }
        if let PsiKind::Elliptic { alpha } = psi_kind {
            if !(alpha > 0.0) {
                return Err(Error::InvalidSystem(format!("ellipticity constant {alpha} must be positive")));
            }
        }
        if psi_kind == PsiKind::Constant && psi.iter().flatten().any(|e| !e.is_literal()) {
            return Err(Error::InvalidSystem("constant dispersion must have literal entries".into()));
        }
        let hamiltonian_field = match &h {
            Some(h) => crate::hamiltonian::HamiltonianSpec::new(h.clone())?.field()?,
            None => Vec::new(),
        };
        Ok(Self { freqs, epsilon, p1, h, psi, psi_kind, m0, hamiltonian_field })
    }

    pub fn n(&self) -> usize {
        self.freqs.len()
    }

    pub fn noise_dim(&self) -> usize {
        self.psi[0].len()
    }

    pub fn freqs(&self) -> &Frequencies {
        &self.freqs
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidSystem(format!("epsilon = {epsilon} must lie in (0, 1]")));
        }
        Ok(Self { epsilon, ..self.clone() })
    }

    pub fn p1(&self) -> &[FieldExpr] {
        &self.p1
    }

    pub fn hamiltonian(&self) -> Option<&FieldExpr> {
        self.h.as_ref()
    }

    /// `P2_k = i dh/d(conj v_k)`; empty when no Hamiltonian is given.
    pub fn hamiltonian_field(&self) -> &[FieldExpr] {
        &self.hamiltonian_field
    }

    pub fn psi(&self) -> &[Vec<FieldExpr>] {
        &self.psi
    }

    pub fn psi_kind(&self) -> PsiKind {
        self.psi_kind
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn has_constant_psi(&self) -> bool {
        self.psi.iter().flatten().all(FieldExpr::is_literal)
    }

    /// Drift components for the chosen variant as expression trees.
    pub fn drift(&self, variant: DriftVariant) -> Vec<FieldExpr> {
        match (variant, self.hamiltonian_field.is_empty()) {
            (DriftVariant::Modified, _) | (DriftVariant::Full, true) => self.p1.clone(),
            (DriftVariant::Full, false) => self
                .p1
                .iter()
                .zip(&self.hamiltonian_field)
                .map(|(a, b)| {
                    FieldExpr::from_node(Node::Add(Box::new(a.root().clone()), Box::new(b.root().clone())), self.n())
                        .expect("same dimension")
                })
                .collect(),
        }
    }

    /// Returns a copy with the dispersion matrix replaced.
    pub fn with_psi(&self, psi: Vec<Vec<FieldExpr>>, psi_kind: PsiKind) -> Result<Self> {
        Self::new(self.freqs.clone(), self.epsilon, self.p1.clone(), self.h.clone(), psi, psi_kind, self.m0)
    }

    /// Stable content hash used to tag ensembles.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("{:?}", self.freqs.as_slice()));
        hasher.update(format!("{:?}", self.epsilon));
        for e in self.p1.iter().chain(self.h.iter()).chain(self.psi.iter().flatten()) {
            hasher.update(e.to_string());
            hasher.update(";");
        }
        hasher.update(format!("{:?}{:?}", self.psi_kind, self.m0));
        let digest = hasher.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

pub(crate) fn check_real_valued(h: &FieldExpr) -> Result<()> {
    let n = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_4ea1);
    for _ in 0..REALITY_SAMPLES {
        let v: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let val = h.eval(&v);
        if val.im.abs() > 1e-10 * val.re.abs().max(1.0) {
            return Err(Error::InvalidSystem(format!("hamiltonian is not real-valued: h = {val} at a sample point")));
        }
    }
    Ok(())
}

/// Convenience constructor from expression strings; `psi_kind` is inferred
/// as constant when every dispersion entry is a literal and smooth otherwise.
pub fn system_from_strs(
    lambdas: &[f64],
    epsilon: f64,
    p1: &[&str],
    h: Option<&str>,
    psi: &[&[&str]],
) -> Result<SystemSpec> {
    let n = lambdas.len();
    let p1 = p1.iter().map(|s| parse_field_expr(s, n)).collect::<Result<Vec<_>>>()?;
    let h = h.map(|s| parse_field_expr(s, n)).transpose()?;
    let psi = psi
        .iter()
        .map(|row| row.iter().map(|s| parse_field_expr(s, n)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let kind = if psi.iter().flatten().all(FieldExpr::is_literal) { PsiKind::Constant } else { PsiKind::Smooth };
    SystemSpec::new(Frequencies::new(lambdas.to_vec())?, epsilon, p1, h, psi, kind, 3.0)
}
