use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `|A_kl - conj(A_lk)|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_DUST, 0)` are floating-point dust.
pub const PSD_DUST: f64 = 1e-9;
/// Eigenvalues below `-NOT_PSD` are rejected.
pub const NOT_PSD: f64 = 1e-6;

/// Square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: DMatrix<Complex64>,
}

/// Result of [`HermitianMatrix::principal_sqrt`].
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtOutcome {
    pub root: HermitianMatrix,
    /// Number of slightly negative eigenvalues clamped to zero.
    pub clamped: usize,
}

impl HermitianMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let n = m.nrows();
        for k in 0..n {
            for l in 0..=k {
                if (m[(k, l)] - m[(l, k)].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidArgument(format!("matrix is not hermitian at ({k}, {l})")));
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// `(M + M^*) / 2`, without checking how far `M` was from Hermitian.
    pub fn symmetrized(m: DMatrix<Complex64>) -> Self {
        let h = (&m + m.adjoint()).map(|z| z * 0.5);
        Self { m: h }
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n, n) }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self { m: DMatrix::from_fn(n, n, |k, l| if k == l { Complex64::new(d[k], 0.0) } else { Complex64::new(0.0, 0.0) }) }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = DMatrix::from_fn(n, n, |k, l| Complex64::new(rows[k][l], 0.0));
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.m[(k, l)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// Real part as row-major nested vectors (for the real symmetric case).
    pub fn real_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|k| (0..self.dim()).map(|l| self.m[(k, l)].re).collect()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|k| (0..n).all(|l| k == l || self.m[(k, l)] == Complex64::new(0.0, 0.0)))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = if self.is_diagonal() {
            (0..self.dim()).map(|k| self.m[(k, k)].re).collect()
        } else {
            self.m.clone().symmetric_eigenvalues().iter().copied().collect()
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        (&self.m - &other.m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn square(&self) -> HermitianMatrix {
        Self::symmetrized(&self.m * &self.m)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n).map(|k| (0..n).map(|l| self.m[(k, l)] * x[l]).sum()).collect()
    }

    /// Principal square root: the unique Hermitian `B >= 0` with `B^2 = A`.
    ///
    /// Eigenvalues down to `-NOT_PSD` are treated as rounding noise and
    /// clamped to zero; anything more negative is an error.
    pub fn principal_sqrt(&self) -> Result<SqrtOutcome> {
        let n = self.dim();
        if self.is_diagonal() {
            let mut clamped = 0;
            let mut d = Vec::with_capacity(n);
            for k in 0..n {
                d.push(clamp_eigenvalue(self.m[(k, k)].re, &mut clamped)?.sqrt());
            }
            return Ok(SqrtOutcome { root: Self::from_real_diagonal(&d), clamped });
        }
        let eig = self.m.clone().symmetric_eigen();
        let mut clamped = 0;
        let mut roots = Vec::with_capacity(n);
        for &lambda in eig.eigenvalues.iter() {
            roots.push(clamp_eigenvalue(lambda, &mut clamped)?.sqrt());
        }
        let v = &eig.eigenvectors;
        let scaled = DMatrix::from_fn(n, n, |k, j| v[(k, j)] * roots[j]);
        let b = scaled * v.adjoint();
        Ok(SqrtOutcome { root: Self::symmetrized(b), clamped })
    }
}

fn clamp_eigenvalue(lambda: f64, clamped: &mut usize) -> Result<f64> {
    if lambda >= 0.0 {
        Ok(lambda)
    } else if lambda >= -NOT_PSD {
        *clamped += 1;
        Ok(0.0)
    } else {
        Err(Error::NotPsd { min_eigenvalue: lambda })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_sq_err(a: &HermitianMatrix) -> f64 {
        let b = a.principal_sqrt().unwrap().root;
        b.square().max_abs_diff(a)
    }

    #[test]
    fn diagonal_root() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 4.0]);
        let b = a.principal_sqrt().unwrap().root;
        assert_eq!(b, HermitianMatrix::from_real_diagonal(&[1.0, 2.0]));
        let i = HermitianMatrix::identity(3);
        assert_eq!(i.principal_sqrt().unwrap().root, i);
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = HermitianMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let b = a.principal_sqrt().unwrap().root;
        let s3 = 3f64.sqrt();
        let expect = [[s3 + 1.0, s3 - 1.0], [s3 - 1.0, s3 + 1.0]];
        for k in 0..2 {
            for l in 0..2 {
                assert!((b.get(k, l) - Complex64::new(0.5 * expect[k][l], 0.0)).norm() < 1e-12);
            }
        }
        assert!(max_sq_err(&a) <= 1e-9 * (1.0 + a.max_abs()));
        assert!(b.min_eigenvalue() >= 0.0);
    }

    #[test]
    fn complex_hermitian_root() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(3.0, 0.0), Complex64::new(1.0, -2.0), Complex64::new(1.0, 2.0), Complex64::new(4.0, 0.0)],
        );
        let a = HermitianMatrix::new(m).unwrap();
        assert!(a.min_eigenvalue() > 0.0);
        assert!(max_sq_err(&a) <= 1e-9 * (1.0 + a.max_abs()));
    }

    #[test]
    fn rejects_non_hermitian_and_non_psd() {
        let m = DMatrix::from_row_slice(2, 2, &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!(HermitianMatrix::new(m).is_err());
        let a = HermitianMatrix::from_real_diagonal(&[1.0, -0.5]);
        assert!(matches!(a.principal_sqrt(), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn clamps_eigenvalue_dust() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, -1e-12]);
        let out = a.principal_sqrt().unwrap();
        assert_eq!(out.clamped, 1);
        assert_eq!(out.root.get(1, 1), Complex64::new(0.0, 0.0));
        let a = HermitianMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let out = a.principal_sqrt().unwrap();
        assert!(out.root.square().max_abs_diff(&a) < 1e-9);
    }
}
