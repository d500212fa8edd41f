//! Averaged coefficients prepared once per system for repeated evaluation
//! inside integrators.

use num_complex::Complex64;

use super::{
    action_diffusion_polys, action_drift_polys, amplitudes, averaged_diffusion_polys, averaged_field_polys,
    complex_square, quad_action_diffusion, quad_action_drift, quad_diffusion, quad_field, real_symmetric,
    AveragingMethod, HermitianMatrix, SqrtOutcome, TorusRule,
};
use crate::error::Result;
use crate::model::{to_polynomial, DriftVariant, FieldExpr, Poly, SystemSpec};

/// A dispersion matrix ready to multiply noise increments.
#[derive(Debug, Clone, PartialEq)]
pub enum Dispersion {
    Diagonal(Vec<f64>),
    Full(HermitianMatrix),
}

impl Dispersion {
    /// `out += D * dw`.
    pub fn apply(&self, dw: &[Complex64], out: &mut [Complex64]) {
        match self {
            Dispersion::Diagonal(d) => {
                for k in 0..d.len() {
                    out[k] += d[k] * dw[k];
                }
            }
            Dispersion::Full(m) => {
                for (o, x) in out.iter_mut().zip(m.mul_vec(dw)) {
                    *o += x;
                }
            }
        }
    }

    /// `out += Re(D) * dw` for real increments.
    pub fn apply_real(&self, dw: &[f64], out: &mut [f64]) {
        match self {
            Dispersion::Diagonal(d) => {
                for k in 0..d.len() {
                    out[k] += d[k] * dw[k];
                }
            }
            Dispersion::Full(m) => {
                let n = m.dim();
                for k in 0..n {
                    out[k] += (0..n).map(|l| m.get(k, l).re * dw[l]).sum::<f64>();
                }
            }
        }
    }

    pub fn to_matrix(&self) -> HermitianMatrix {
        match self {
            Dispersion::Diagonal(d) => HermitianMatrix::from_real_diagonal(d),
            Dispersion::Full(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone)]
enum FieldEval {
    Poly(Vec<Poly>),
    Quad { fields: Vec<FieldExpr>, rule: TorusRule },
}

#[derive(Debug, Clone)]
enum MatrixEval {
    ConstantDiag(Vec<f64>),
    Poly(Vec<Poly>),
    Quad { psi: Vec<Vec<FieldExpr>>, rule: TorusRule },
}

fn rule_of(method: AveragingMethod) -> Result<Option<TorusRule>> {
    let r = method.rule();
    if let Some(r) = r {
        r.validate()?;
    }
    Ok(r)
}

/// `b_k = (sum_l |Psi_kl|^2)^(1/2)` for a constant dispersion.
pub fn constant_psi_norms(spec: &SystemSpec) -> Vec<f64> {
    let zero = vec![Complex64::new(0.0, 0.0); spec.n()];
    spec.psi().iter().map(|row| row.iter().map(|e| e.eval(&zero).norm_sqr()).sum::<f64>().sqrt()).collect()
}

fn psi_polys(spec: &SystemSpec) -> Result<Vec<Vec<Poly>>> {
    spec.psi().iter().map(|row| row.iter().map(to_polynomial).collect()).collect()
}

/// Drift `<<P>>` and dispersion `B = sqrt(A)` of an effective equation.
#[derive(Debug, Clone)]
pub struct EffectiveCoefficients {
    n: usize,
    drift: FieldEval,
    diffusion: MatrixEval,
}

impl EffectiveCoefficients {
    /// Constant dispersion always uses the closed form `B = diag(b_k)`.
    pub fn new(spec: &SystemSpec, variant: DriftVariant, method: AveragingMethod) -> Result<Self> {
        let fields = spec.drift(variant);
        let rule = rule_of(method)?;
        let drift = match rule {
            None => FieldEval::Poly(averaged_field_polys(&fields.iter().map(to_polynomial).collect::<Result<Vec<_>>>()?)),
            Some(rule) => FieldEval::Quad { fields, rule },
        };
        let diffusion = if spec.has_constant_psi() {
            MatrixEval::ConstantDiag(constant_psi_norms(spec))
        } else {
            match rule {
                None => MatrixEval::Poly(averaged_diffusion_polys(&psi_polys(spec)?)),
                Some(rule) => MatrixEval::Quad { psi: spec.psi().to_vec(), rule },
            }
        };
        Ok(Self { n: spec.n(), drift, diffusion })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn drift(&self, a: &[Complex64]) -> Vec<Complex64> {
        match &self.drift {
            FieldEval::Poly(p) => p.iter().map(|q| q.eval(a)).collect(),
            FieldEval::Quad { fields, rule } => quad_field(fields, a, *rule).expect("rule validated"),
        }
    }

    /// `B(a)` and the number of clamped eigenvalues.
    pub fn dispersion(&self, a: &[Complex64]) -> Result<(Dispersion, usize)> {
        let flat = match &self.diffusion {
            MatrixEval::ConstantDiag(b) => return Ok((Dispersion::Diagonal(b.clone()), 0)),
            MatrixEval::Poly(p) => p.iter().map(|q| q.eval(a)).collect::<Vec<_>>(),
            MatrixEval::Quad { psi, rule } => quad_diffusion(psi, a, *rule)?,
        };
        let SqrtOutcome { root, clamped } = complex_square(self.n, &flat).principal_sqrt()?;
        Ok((Dispersion::Full(root), clamped))
    }

    /// Whether `B` is constant, so callers may evaluate it once.
    pub fn constant_dispersion(&self) -> Option<Dispersion> {
        match &self.diffusion {
            MatrixEval::ConstantDiag(b) => Some(Dispersion::Diagonal(b.clone())),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
enum ActionDriftEval {
    Poly(Vec<Poly>),
    Quad { p: Vec<FieldExpr>, psi: Vec<Vec<FieldExpr>>, rule: TorusRule },
}

/// Drift `F` and dispersion `K = sqrt(S)` of the averaged action equation.
#[derive(Debug, Clone)]
pub struct ActionCoefficients {
    n: usize,
    drift: ActionDriftEval,
    diffusion: MatrixEval,
}

impl ActionCoefficients {
    /// Constant dispersion uses the closed form `K = diag(b_k sqrt(2 I_k))`.
    pub fn new(spec: &SystemSpec, method: AveragingMethod) -> Result<Self> {
        let p = spec.drift(DriftVariant::Full);
        let rule = rule_of(method)?;
        let drift = match rule {
            None => {
                let pp = p.iter().map(to_polynomial).collect::<Result<Vec<_>>>()?;
                ActionDriftEval::Poly(action_drift_polys(&pp, &psi_polys(spec)?))
            }
            Some(rule) => ActionDriftEval::Quad { p, psi: spec.psi().to_vec(), rule },
        };
        let diffusion = if spec.has_constant_psi() {
            MatrixEval::ConstantDiag(constant_psi_norms(spec))
        } else {
            match rule {
                None => MatrixEval::Poly(action_diffusion_polys(&psi_polys(spec)?)),
                Some(rule) => MatrixEval::Quad { psi: spec.psi().to_vec(), rule },
            }
        };
        Ok(Self { n: spec.n(), drift, diffusion })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn drift(&self, i: &[f64]) -> Vec<f64> {
        let a = amplitudes(i);
        match &self.drift {
            ActionDriftEval::Poly(p) => p.iter().map(|q| q.eval(&a).re).collect(),
            ActionDriftEval::Quad { p, psi, rule } => quad_action_drift(p, psi, &a, *rule).expect("rule validated"),
        }
    }

    /// `K(I)` and the number of clamped eigenvalues.
    pub fn dispersion(&self, i: &[f64]) -> Result<(Dispersion, usize)> {
        let a = amplitudes(i);
        let flat = match &self.diffusion {
            MatrixEval::ConstantDiag(b) => {
                let d = b.iter().zip(i).map(|(b, &x)| b * (2.0 * x.max(0.0)).sqrt()).collect();
                return Ok((Dispersion::Diagonal(d), 0));
            }
            MatrixEval::Poly(p) => p.iter().map(|q| q.eval(&a).re).collect::<Vec<_>>(),
            MatrixEval::Quad { psi, rule } => quad_action_diffusion(psi, &a, *rule)?,
        };
        let SqrtOutcome { root, clamped } = real_symmetric(self.n, &flat).principal_sqrt()?;
        Ok((Dispersion::Full(root), clamped))
    }
}
