//! Wirtinger calculus and hamiltonian fields `P_k = i dh/d(conj v_k)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::averaging::{averaged_function_poly, AveragingMethod, average_function};
use crate::error::{Error, Result};
use crate::model::{check_real_valued, to_polynomial, ComplexVec, FieldExpr, Poly};

/// Default central-difference step for [`WirtingerMethod::FiniteDiff`].
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A real-valued Hamiltonian `h(v)`.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    h: FieldExpr,
    poly: Option<Poly>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WirtingerMethod {
    Symbolic,
    FiniteDiff { step: f64 },
}

impl HamiltonianSpec {
    pub fn new(h: FieldExpr) -> Result<Self> {
        check_real_valued(&h)?;
        let poly = to_polynomial(&h).ok();
        Ok(Self { h, poly })
    }

    pub fn n(&self) -> usize {
        self.h.dim()
    }

    pub fn expr(&self) -> &FieldExpr {
        &self.h
    }

    pub fn poly(&self) -> Result<&Poly> {
        self.poly.as_ref().ok_or_else(|| Error::NonPolynomial(self.h.to_string()))
    }

    /// `i dh/d(conj v_k)` per component as polynomials.
    pub fn field_polys(&self) -> Result<Vec<Poly>> {
        let p = self.poly()?;
        Ok((0..self.n()).map(|k| p.d_dvbar(k).scale(Complex64::i())).collect())
    }

    /// Hamiltonian field as expression trees.
    pub fn field(&self) -> Result<Vec<FieldExpr>> {
        Ok(self.field_polys()?.iter().map(Poly::to_expr).collect())
    }

    /// `<h>` as a polynomial.
    pub fn averaged_poly(&self) -> Result<Poly> {
        Ok(averaged_function_poly(self.poly()?))
    }
}

/// `dh/d(conj v_k) = (dh/dx_k + i dh/dy_k) / 2` at `v`.
pub fn wirtinger_dbar(h: &HamiltonianSpec, v: &ComplexVec, method: WirtingerMethod) -> Result<ComplexVec> {
    v.check_dim(h.n())?;
    match method {
        WirtingerMethod::Symbolic => {
            let p = h.poly()?;
            ComplexVec::new((0..h.n()).map(|k| p.d_dvbar(k).eval(v)).collect())
        }
        WirtingerMethod::FiniteDiff { step } => {
            if !(step > 0.0 && step <= 1e-3) {
                return Err(Error::InvalidArgument(format!("finite-difference step {step} outside (0, 1e-3]")));
            }
            let mut w = v.to_vec();
            let mut out = Vec::with_capacity(h.n());
            for k in 0..h.n() {
                let z = w[k];
                let mut diff = |d: Complex64| {
                    w[k] = z + d;
                    let plus = h.h.eval(&w);
                    w[k] = z - d;
                    let minus = h.h.eval(&w);
                    w[k] = z;
                    (plus - minus) / (2.0 * step)
                };
                let dx = diff(Complex64::new(step, 0.0));
                let dy = diff(Complex64::new(0.0, step));
                out.push(0.5 * (dx + Complex64::i() * dy));
            }
            ComplexVec::new(out)
        }
    }
}

/// Components `i dh/d(conj v_k)`.
pub fn hamiltonian_field(h: &HamiltonianSpec) -> Result<Vec<FieldExpr>> {
    h.field()
}

/// `<h>(a)`; symbolic for polynomial `h`, quadrature otherwise.
pub fn averaged_hamiltonian(h: &HamiltonianSpec, a: &ComplexVec) -> Result<f64> {
    a.check_dim(h.n())?;
    match &h.poly {
        Some(p) => Ok(averaged_function_poly(p).eval(a).re),
        None => Ok(average_function(&h.h, a, AveragingMethod::default())?.re),
    }
}

/// `Re((i d<h>/d(conj v_k)) conj(v_k))` per component; vanishes identically.
pub fn orthogonality_residual(h: &HamiltonianSpec, v: &ComplexVec) -> Result<Vec<f64>> {
    v.check_dim(h.n())?;
    let avg = h.averaged_poly()?;
    Ok((0..h.n())
        .map(|k| {
            let z = Complex64::i() * avg.d_dvbar(k).eval(v);
            (z * v[k].conj()).re
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_field_expr;

    fn ham(src: &str, n: usize) -> HamiltonianSpec {
        HamiltonianSpec::new(parse_field_expr(src, n).unwrap()).unwrap()
    }

    fn cv(pairs: &[(f64, f64)]) -> ComplexVec {
        ComplexVec::from_pairs(pairs).unwrap()
    }

    #[test]
    fn dbar_examples() {
        let fd = WirtingerMethod::FiniteDiff { step: DEFAULT_FD_STEP };
        let h = ham("(v1*cv1)^2", 1);
        for m in [WirtingerMethod::Symbolic, fd] {
            let d = wirtinger_dbar(&h, &cv(&[(1.0, 0.0)]), m).unwrap();
            assert!((d[0] - 2.0).norm() < 1e-6);
        }
        let h = ham("abs2(v1)*abs2(v2)", 2);
        let d = wirtinger_dbar(&h, &cv(&[(1.0, 1.0), (2.0, 0.0)]), WirtingerMethod::Symbolic).unwrap();
        assert_eq!(d[0], Complex64::new(4.0, 4.0));
        assert!(wirtinger_dbar(&h, &cv(&[(1.0, 0.0), (0.0, 0.0)]), WirtingerMethod::FiniteDiff { step: 0.1 }).is_err());
    }

    #[test]
    fn field_examples() {
        let v = cv(&[(0.3, -0.7), (1.2, 0.4)]);
        let h = ham("abs2(v1)*abs2(v2)", 2);
        let f = hamiltonian_field(&h).unwrap();
        let i = Complex64::i();
        assert!((f[0].eval(&v) - i * v[0] * v[1].norm_sqr()).norm() < 1e-14);
        assert!((f[1].eval(&v) - i * v[1] * v[0].norm_sqr()).norm() < 1e-14);
        let f = hamiltonian_field(&ham("0", 2)).unwrap();
        assert!(f.iter().all(|e| e.eval(&v) == Complex64::new(0.0, 0.0)));
        let f = hamiltonian_field(&ham("abs2(v1)", 1)).unwrap();
        assert!((f[0].eval(&v[..1]) - i * v[0]).norm() < 1e-15);
    }

    #[test]
    fn averaged_hamiltonian_examples() {
        let a = cv(&[(0.3, -0.7), (1.2, 0.4)]);
        let h = ham("abs2(v1)*abs2(v2)", 2);
        assert!((averaged_hamiltonian(&h, &a).unwrap() - a[0].norm_sqr() * a[1].norm_sqr()).abs() < 1e-14);
        let h = ham("(v1^2 + cv1^2)*0.5", 1);
        assert_eq!(averaged_hamiltonian(&h, &cv(&[(1.5, 0.5)])).unwrap(), 0.0);
        let h = ham("abs2(v1)^2 + v1*cv2 + cv1*v2 + 3*abs2(v2)", 2);
        let q = average_function(h.expr(), &a, AveragingMethod::Quadrature { grid: 32 }).unwrap();
        assert!((averaged_hamiltonian(&h, &a).unwrap() - q.re).abs() < 1e-10);
    }

    #[test]
    fn orthogonality_examples() {
        let h = ham("abs2(v1)*abs2(v2)", 2);
        let r = orthogonality_residual(&h, &cv(&[(1.0, 1.0), (2.0, 0.0)])).unwrap();
        assert_eq!(r, vec![0.0, 0.0]);
        let r = orthogonality_residual(&ham("0", 2), &cv(&[(1.0, 1.0), (2.0, 0.0)])).unwrap();
        assert_eq!(r, vec![0.0, 0.0]);
    }

    #[test]
    fn non_polynomial_hamiltonian() {
        let h = ham("abs(v1)", 1);
        assert!(matches!(h.field(), Err(Error::NonPolynomial(_))));
        let a = cv(&[(0.0, 3.0)]);
        assert!((averaged_hamiltonian(&h, &a).unwrap() - 3.0).abs() < 1e-12);
        let d = wirtinger_dbar(&h, &a, WirtingerMethod::FiniteDiff { step: DEFAULT_FD_STEP }).unwrap();
        // d|z|/d(conj z) = z / (2|z|)
        assert!((d[0] - Complex64::new(0.0, 0.5)).norm() < 1e-8);
    }
}
