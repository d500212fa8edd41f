//! Torus averaging of functions, vector fields and diffusion matrices, and
//! the coefficients of the averaged action equation.
//!
//! All averages are over `w` in the torus with `v = Phi_{-w} a`, where
//! `(Phi_w a)_k = exp(i w_k) a_k`. The symbolic backend keeps monomials by
//! winding: `alpha = beta` for scalars, `alpha - beta = e_k` for field
//! component `k`, `alpha - beta = e_k - e_j` for diffusion entry `(k, j)`.

pub mod compiled;
pub mod hermitian;
pub mod torus;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use compiled::{ActionCoefficients, Dispersion, EffectiveCoefficients};
pub use hermitian::{HermitianMatrix, SqrtOutcome};
pub use torus::{torus_mean, TorusRule};

use crate::error::{Error, Result};
use crate::model::{to_polynomial, ComplexVec, FieldExpr, Poly, SystemSpec};

/// Default per-dimension grid for standalone quadrature.
pub const DEFAULT_GRID: usize = 64;
/// Default per-dimension grid inside integrators.
pub const INTEGRATOR_GRID: usize = 16;

/// How torus averages are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum AveragingMethod {
    /// Exact monomial selection; polynomial inputs only.
    Symbolic,
    /// Tensor-product rectangle rule.
    Quadrature { grid: usize },
    /// Uniform random angles.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for AveragingMethod {
    fn default() -> Self {
        AveragingMethod::Quadrature { grid: DEFAULT_GRID }
    }
}

impl AveragingMethod {
    fn rule(self) -> Option<TorusRule> {
        match self {
            AveragingMethod::Symbolic => None,
            AveragingMethod::Quadrature { grid } => Some(TorusRule::Grid(grid)),
            AveragingMethod::MonteCarlo { samples, seed } => Some(TorusRule::MonteCarlo { samples, seed }),
        }
    }

    /// Symbolic when every drift and dispersion entry is polynomial,
    /// otherwise quadrature on the integrator grid.
    pub fn for_integrator(spec: &SystemSpec) -> Self {
        let all_poly = spec.p1().iter().chain(spec.hamiltonian_field()).chain(spec.psi().iter().flatten()).all(FieldExpr::is_polynomial);
        if all_poly {
            AveragingMethod::Symbolic
        } else {
            AveragingMethod::Quadrature { grid: INTEGRATOR_GRID }
        }
    }
}

/// Point on the torus, stored with every angle in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationVector(Vec<f64>);

impl RotationVector {
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("rotation angles must be finite".into()));
        }
        Ok(Self(omegas.into_iter().map(canonical_angle).collect()))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
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

/// Representative of `w mod 2 pi` in `[0, 2 pi)`.
pub fn canonical_angle(w: f64) -> f64 {
    let r = w.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Actions `I_k = |v_k|^2 / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionVector(Vec<f64>);

impl ActionVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidArgument("actions must be finite and nonnegative".into()));
        }
        Ok(Self(entries))
    }

    pub fn from_complex(v: &[Complex64]) -> Self {
        Self(v.iter().map(|z| 0.5 * z.norm_sqr()).collect())
    }

    /// `[I] = min_k I_k`.
    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
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

    /// The real point `a_k = sqrt(2 I_k)` on the action torus.
    pub fn amplitudes(&self) -> Vec<Complex64> {
        amplitudes(&self.0)
    }
}

pub(crate) fn amplitudes(actions: &[f64]) -> Vec<Complex64> {
    actions.iter().map(|&i| Complex64::new((2.0 * i.max(0.0)).sqrt(), 0.0)).collect()
}

/// `(Phi_w v)_k = exp(i w_k) v_k`.
pub fn rotate(w: &RotationVector, v: &ComplexVec) -> Result<ComplexVec> {
    v.check_dim(w.len())?;
    ComplexVec::new(v.iter().zip(w.as_slice()).map(|(z, &om)| z * Complex64::cis(om)).collect())
}

fn check_dims<'a>(exprs: impl IntoIterator<Item = &'a FieldExpr>, n: usize) -> Result<()> {
    for e in exprs {
        if e.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: e.dim() });
        }
    }
    Ok(())
}

fn unit(n: usize, k: usize) -> Vec<i64> {
    let mut e = vec![0; n];
    e[k] = 1;
    e
}

fn polys(exprs: &[FieldExpr]) -> Result<Vec<Poly>> {
    exprs.iter().map(to_polynomial).collect()
}

fn psi_polys(psi: &[Vec<FieldExpr>]) -> Result<Vec<Vec<Poly>>> {
    psi.iter().map(|row| polys(row)).collect()
}

/// `<f>` as a polynomial in `a`.
pub fn averaged_function_poly(f: &Poly) -> Poly {
    f.select_winding(&vec![0; f.dim()])
}

/// `<<P>>_k` as polynomials in `a`.
pub fn averaged_field_polys(p: &[Poly]) -> Vec<Poly> {
    let n = p.len();
    p.iter().enumerate().map(|(k, pk)| pk.select_winding(&unit(n, k))).collect()
}

/// Entries of `A` in row-major order as polynomials in `a`.
pub fn averaged_diffusion_polys(psi: &[Vec<Poly>]) -> Vec<Poly> {
    let n = psi.len();
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        for j in 0..n {
            let mut q = Poly::zero(n);
            for (pk, pj) in psi[k].iter().zip(&psi[j]) {
                q = q.add(&pk.mul(&pj.conj()));
            }
            let mut w = vec![0i64; n];
            w[k] += 1;
            w[j] -= 1;
            out.push(q.select_winding(&w));
        }
    }
    out
}

/// Angle averages of `v_k conj(P_k) + sum_l |Psi_kl|^2`; `F_k` is the real part.
pub fn action_drift_polys(p: &[Poly], psi: &[Vec<Poly>]) -> Vec<Poly> {
    let n = p.len();
    (0..n)
        .map(|k| {
            let mut g = Poly::var(n, k).mul(&p[k].conj());
            for e in &psi[k] {
                g = g.add(&e.mul(&e.conj()));
            }
            averaged_function_poly(&g)
        })
        .collect()
}

/// Angle averages of `sum_l v_k conj(Psi_kl) conj(v_j) Psi_jl`, row-major; `S` is the real part.
pub fn action_diffusion_polys(psi: &[Vec<Poly>]) -> Vec<Poly> {
    let n = psi.len();
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        for j in 0..n {
            let mut q = Poly::zero(n);
            for (pk, pj) in psi[k].iter().zip(&psi[j]) {
                q = q.add(&pk.conj().mul(pj));
            }
            let q = Poly::var(n, k).mul(&Poly::conj_var(n, j)).mul(&q);
            out.push(averaged_function_poly(&q));
        }
    }
    out
}

pub(crate) fn quad_field(p: &[FieldExpr], a: &[Complex64], rule: TorusRule) -> Result<Vec<Complex64>> {
    torus_mean(a, rule, p.len(), |v, ph, acc| {
        for (k, pk) in p.iter().enumerate() {
            acc[k] += ph[k] * pk.eval(v);
        }
    })
}

pub(crate) fn quad_diffusion(psi: &[Vec<FieldExpr>], a: &[Complex64], rule: TorusRule) -> Result<Vec<Complex64>> {
    let n = psi.len();
    let n1 = psi[0].len();
    let mut m = vec![Complex64::new(0.0, 0.0); n * n1];
    torus_mean(a, rule, n * n, |v, ph, acc| {
        for k in 0..n {
            for l in 0..n1 {
                m[k * n1 + l] = ph[k] * psi[k][l].eval(v);
            }
        }
        for k in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for l in 0..n1 {
                    s += m[k * n1 + l] * m[j * n1 + l].conj();
                }
                acc[k * n + j] += s;
            }
        }
    })
}

pub(crate) fn quad_action_drift(
    p: &[FieldExpr],
    psi: &[Vec<FieldExpr>],
    a: &[Complex64],
    rule: TorusRule,
) -> Result<Vec<f64>> {
    let out = torus_mean(a, rule, p.len(), |v, _, acc| {
        for (k, pk) in p.iter().enumerate() {
            let mut g = v[k] * pk.eval(v).conj();
            for e in &psi[k] {
                g += e.eval(v).norm_sqr();
            }
            acc[k] += g;
        }
    })?;
    Ok(out.iter().map(|z| z.re).collect())
}

pub(crate) fn quad_action_diffusion(psi: &[Vec<FieldExpr>], a: &[Complex64], rule: TorusRule) -> Result<Vec<f64>> {
    let n = psi.len();
    let n1 = psi[0].len();
    let mut x = vec![Complex64::new(0.0, 0.0); n * n1];
    let out = torus_mean(a, rule, n * n, |v, _, acc| {
        for k in 0..n {
            for l in 0..n1 {
                x[k * n1 + l] = v[k] * psi[k][l].eval(v).conj();
            }
        }
        for k in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n1 {
                    let (p, q) = (x[k * n1 + l], x[j * n1 + l]);
                    s += p.re * q.re + p.im * q.im;
                }
                acc[k * n + j] += s;
            }
        }
    })?;
    Ok(out.iter().map(|z| z.re).collect())
}

pub(crate) fn real_symmetric(n: usize, flat: &[f64]) -> HermitianMatrix {
    let rows: Vec<Vec<f64>> = (0..n).map(|k| flat[k * n..(k + 1) * n].to_vec()).collect();
    let m = nalgebra::DMatrix::from_fn(n, n, |k, j| Complex64::new(rows[k][j], 0.0));
    HermitianMatrix::symmetrized(m)
}

pub(crate) fn complex_square(n: usize, flat: &[Complex64]) -> HermitianMatrix {
    HermitianMatrix::symmetrized(nalgebra::DMatrix::from_fn(n, n, |k, j| flat[k * n + j]))
}

/// `<f>(a)`, the torus average of a scalar function.
pub fn average_function(f: &FieldExpr, a: &ComplexVec, method: AveragingMethod) -> Result<Complex64> {
    a.check_dim(f.dim())?;
    match method.rule() {
        None => Ok(averaged_function_poly(&to_polynomial(f)?).eval(a)),
        Some(rule) => Ok(torus_mean(a, rule, 1, |v, _, acc| acc[0] += f.eval(v))?[0]),
    }
}

/// `<<P>>(a)`, the torus average of a vector field.
pub fn average_field(p: &[FieldExpr], a: &ComplexVec, method: AveragingMethod) -> Result<ComplexVec> {
    let n = p.len();
    a.check_dim(n)?;
    check_dims(p, n)?;
    let out = match method.rule() {
        None => averaged_field_polys(&polys(p)?).iter().map(|q| q.eval(a)).collect(),
        Some(rule) => quad_field(p, a, rule)?,
    };
    ComplexVec::new(out)
}

/// Averaged diffusion matrix `A(a)`.
pub fn averaged_diffusion(psi: &[Vec<FieldExpr>], a: &ComplexVec, method: AveragingMethod) -> Result<HermitianMatrix> {
    let n = psi.len();
    check_psi(psi, n)?;
    a.check_dim(n)?;
    let flat = match method.rule() {
        None => averaged_diffusion_polys(&psi_polys(psi)?).iter().map(|q| q.eval(a)).collect::<Vec<_>>(),
        Some(rule) => quad_diffusion(psi, a, rule)?,
    };
    Ok(complex_square(n, &flat))
}

pub(crate) fn check_psi(psi: &[Vec<FieldExpr>], n: usize) -> Result<()> {
    let n1 = psi.first().map_or(0, Vec::len);
    if psi.is_empty() || n1 == 0 {
        return Err(Error::InvalidArgument("dispersion matrix is empty".into()));
    }
    if let Some(row) = psi.iter().find(|r| r.len() != n1) {
        return Err(Error::DimensionMismatch { expected: n1, got: row.len() });
    }
    check_dims(psi.iter().flatten(), n)
}

/// `F(I)` for an arbitrary drift `p` and dispersion `psi`.
pub fn action_drift_of(p: &[FieldExpr], psi: &[Vec<FieldExpr>], i: &ActionVector, method: AveragingMethod) -> Result<Vec<f64>> {
    let n = p.len();
    if i.len() != n || psi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: i.len().min(psi.len()) });
    }
    check_dims(p, n)?;
    check_psi(psi, n)?;
    let a = i.amplitudes();
    match method.rule() {
        None => Ok(action_drift_polys(&polys(p)?, &psi_polys(psi)?).iter().map(|q| q.eval(&a).re).collect()),
        Some(rule) => quad_action_drift(p, psi, &a, rule),
    }
}

/// Drift `F(I)` of the averaged action equation, using the full drift `P1 + P2`.
pub fn action_drift(spec: &SystemSpec, i: &ActionVector, method: AveragingMethod) -> Result<Vec<f64>> {
    action_drift_of(&spec.drift(crate::model::DriftVariant::Full), spec.psi(), i, method)
}

/// `S(I)`, `K(I) = sqrt(S(I))`, and how many eigenvalues were clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDiffusion {
    pub s: HermitianMatrix,
    pub k: HermitianMatrix,
    pub clamped: usize,
}

/// Diffusion of the averaged action equation.
pub fn action_diffusion(spec: &SystemSpec, i: &ActionVector, method: AveragingMethod) -> Result<ActionDiffusion> {
    action_diffusion_of(spec.psi(), i, method)
}

pub fn action_diffusion_of(psi: &[Vec<FieldExpr>], i: &ActionVector, method: AveragingMethod) -> Result<ActionDiffusion> {
    let n = psi.len();
    check_psi(psi, n)?;
    if i.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: i.len() });
    }
    let a = i.amplitudes();
    let flat = match method.rule() {
        None => action_diffusion_polys(&psi_polys(psi)?).iter().map(|q| q.eval(&a).re).collect::<Vec<_>>(),
        Some(rule) => quad_action_diffusion(psi, &a, rule)?,
    };
    let s = real_symmetric(n, &flat);
    let SqrtOutcome { root, clamped } = s.principal_sqrt()?;
    Ok(ActionDiffusion { s, k: root, clamped })
}
