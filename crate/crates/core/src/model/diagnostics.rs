//! Sampling diagnostics for the standing assumptions on a system.
//!
//! None of these certify a statement for all `v`; each report carries the
//! parameters it was computed with.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{FieldExpr, Frequencies, SystemSpec};
use crate::averaging::HermitianMatrix;
use crate::error::{Error, Result};

/// Largest number of integer vectors `check_nonresonance` will scan.
const MAX_SCAN: u128 = 200_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonresonanceReport {
    pub resonant: bool,
    /// Minimizing `m` (first nonzero entry positive) when resonant.
    pub witness: Option<Vec<i64>>,
    pub min_abs: f64,
    pub order_bound: i64,
    pub tol: f64,
}

/// Scans every nonzero `m` with `|m|_inf <= order_bound` for `|m . lambda| < tol`.
///
/// Only one of `m`, `-m` is visited. The sum is taken over terms sorted by
/// value, so permuting the frequencies does not change `min_abs`.
pub fn check_nonresonance(freqs: &Frequencies, order_bound: i64, tol: f64) -> Result<NonresonanceReport> {
    if order_bound < 1 {
        return Err(Error::InvalidArgument(format!("order_bound = {order_bound} must be >= 1")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol = {tol} must be positive")));
    }
    let lambdas = freqs.as_slice();
    let n = lambdas.len();
    let side = (2 * order_bound + 1) as u128;
    if side.checked_pow(n as u32).is_none_or(|t| t > MAX_SCAN) {
        return Err(Error::InvalidArgument(format!("scan of ({side})^{n} vectors is too large")));
    }
    let mut m = vec![-order_bound; n];
    let mut terms = vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut best_m = Vec::new();
    loop {
        if let Some(&first) = m.iter().find(|&&x| x != 0) {
            if first > 0 {
                for j in 0..n {
                    terms[j] = m[j] as f64 * lambdas[j];
                }
                terms.sort_by(f64::total_cmp);
                let s = terms.iter().sum::<f64>().abs();
                if s < best {
                    best = s;
                    best_m.clone_from(&m);
                }
            }
        }
        let mut k = n;
        loop {
            if k == 0 {
                let resonant = best < tol;
                return Ok(NonresonanceReport {
                    resonant,
                    witness: resonant.then_some(best_m),
                    min_abs: best,
                    order_bound,
                    tol,
                });
            }
            k -= 1;
            if m[k] < order_bound {
                m[k] += 1;
                break;
            }
            m[k] = -order_bound;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub lambda_lower: f64,
    pub lambda_upper: f64,
    pub pass: bool,
    pub sample_count: usize,
    pub seed: u64,
    pub radius: f64,
}

/// Sampling radius for [`check_ellipticity`].
pub const ELLIPTICITY_RADIUS: f64 = 10.0;

/// Uniform point in the ball of radius `r` in `C^n`.
fn ball_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<Complex64> {
    let g: Vec<f64> = (0..2 * n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let rho = r * rng.gen::<f64>().powf(1.0 / (2 * n) as f64);
    (0..n).map(|k| Complex64::new(g[2 * k], g[2 * k + 1]) * (rho / norm)).collect()
}

fn psi_psi_star(psi: &[Vec<FieldExpr>], v: &[Complex64]) -> HermitianMatrix {
    let n = psi.len();
    let vals: Vec<Vec<Complex64>> = psi.iter().map(|row| row.iter().map(|e| e.eval(v)).collect()).collect();
    HermitianMatrix::symmetrized(DMatrix::from_fn(n, n, |k, j| {
        vals[k].iter().zip(&vals[j]).map(|(x, y)| x * y.conj()).sum()
    }))
}

/// Extreme eigenvalues of `Psi(v) Psi(v)^*` over `v = 0` and `sample_count` random states.
pub fn check_ellipticity(spec: &SystemSpec, sample_count: usize, seed: u64) -> Result<EllipticityReport> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument("sample_count must be >= 1".into()));
    }
    let n = spec.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for s in 0..=sample_count {
        if s > 0 {
            v = ball_point(&mut rng, n, ELLIPTICITY_RADIUS);
        }
        let ev = psi_psi_star(spec.psi(), &v).eigenvalues();
        lo = lo.min(ev[0]);
        hi = hi.max(ev[n - 1]);
    }
    Ok(EllipticityReport { lambda_lower: lo, lambda_upper: hi, pass: lo > 0.0, sample_count, seed, radius: ELLIPTICITY_RADIUS })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub c_m0_estimate: f64,
    pub m0: f64,
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    pub seed: u64,
}

/// Points sampled per radius by [`estimate_growth`].
pub const GROWTH_SAMPLES: usize = 512;

/// Sampled `sup_R (1+R)^-m0 (Lip(f|B_R) + sup_{B_R} |f|)`.
///
/// Lipschitz constants come from difference quotients over consecutive
/// sample pairs and over short random chords, so the estimate is a lower bound.
pub fn estimate_growth(expr: &FieldExpr, m0: f64, radii: &[f64], seed: u64) -> Result<GrowthReport> {
    if radii.is_empty() || radii.iter().any(|r| !(*r >= 1.0)) {
        return Err(Error::InvalidArgument("radii must be nonempty and all >= 1".into()));
    }
    let n = expr.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for &r in radii {
        let pts: Vec<Vec<Complex64>> = (0..GROWTH_SAMPLES).map(|_| ball_point(&mut rng, n, r)).collect();
        let vals: Vec<Complex64> = pts.iter().map(|p| expr.eval(p)).collect();
        let sup = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut lip: f64 = 0.0;
        for i in 1..GROWTH_SAMPLES {
            lip = lip.max(quotient(&pts[i - 1], &pts[i], vals[i - 1], vals[i]));
            let h = ball_point(&mut rng, n, 1e-4 * r);
            let q: Vec<Complex64> = pts[i].iter().zip(&h).map(|(x, d)| x + d).collect();
            if q.iter().map(|z| z.norm_sqr()).sum::<f64>() <= r * r {
                lip = lip.max(quotient(&pts[i], &q, vals[i], expr.eval(&q)));
            }
        }
        best = best.max((1.0 + r).powf(-m0) * (lip + sup));
    }
    Ok(GrowthReport { c_m0_estimate: best, m0, radii: radii.to_vec(), samples_per_radius: GROWTH_SAMPLES, seed })
}

fn quotient(x: &[Complex64], y: &[Complex64], fx: Complex64, fy: Complex64) -> f64 {
    let d = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    if d > 0.0 {
        (fx - fy).norm() / d
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_field_expr, system_from_strs};

    #[test]
    fn nonresonance_examples() {
        let r = check_nonresonance(&Frequencies::new(vec![1.0, 2.0]).unwrap(), 2, 1e-9).unwrap();
        assert!(r.resonant);
        assert_eq!(r.witness, Some(vec![2, -1]));
        assert_eq!(r.min_abs, 0.0);
        let r = check_nonresonance(&Frequencies::new(vec![1.0, 2f64.sqrt()]).unwrap(), 10, 1e-6).unwrap();
        assert!(!r.resonant);
        assert!(r.witness.is_none());
        assert!(r.min_abs > 1e-3);
        let r = check_nonresonance(&Frequencies::new(vec![1.0]).unwrap(), 5, 1e-9).unwrap();
        assert!(!r.resonant);
        assert_eq!(r.min_abs, 1.0);
        assert!(check_nonresonance(&Frequencies::new(vec![1.0]).unwrap(), 0, 1e-9).is_err());
    }

    #[test]
    fn ellipticity_examples() {
        let id = system_from_strs(&[1.0, 2.0], 0.1, &["0", "0"], None, &[&["1", "0"], &["0", "1"]]).unwrap();
        let r = check_ellipticity(&id, 16, 1).unwrap();
        assert_eq!((r.lambda_lower, r.lambda_upper, r.pass), (1.0, 1.0, true));
        let deg = system_from_strs(&[1.0, 2.0], 0.1, &["0", "0"], None, &[&["1", "0"], &["0", "0"]]).unwrap();
        let r = check_ellipticity(&deg, 16, 1).unwrap();
        assert_eq!(r.lambda_lower, 0.0);
        assert!(!r.pass);
        let sm = system_from_strs(&[1.0, 2.0], 0.1, &["0", "0"], None, &[&["1", "v1"], &["0", "1"]]).unwrap();
        let r = check_ellipticity(&sm, 200, 7).unwrap();
        assert!(r.pass);
        // det(Psi Psi^*) = 1 forces lambda_min = 1 / lambda_max
        assert!(r.lambda_lower * r.lambda_upper <= 1.0 + 1e-9);
    }

    #[test]
    fn growth_examples() {
        let radii = [1.0, 2.0, 5.0, 10.0];
        let r = estimate_growth(&parse_field_expr("v1", 1).unwrap(), 1.0, &radii, 3).unwrap();
        assert!(r.c_m0_estimate <= 2.0 + 1e-9 && r.c_m0_estimate > 0.5);
        let r = estimate_growth(&parse_field_expr("5", 1).unwrap(), 0.0, &radii, 3).unwrap();
        assert_eq!(r.c_m0_estimate, 5.0);
        let cubic = parse_field_expr("abs2(v1)*v1", 1).unwrap();
        let a = estimate_growth(&cubic, 3.0, &radii, 3).unwrap().c_m0_estimate;
        let b = estimate_growth(&cubic, 3.0, &[1.0, 2.0, 5.0, 10.0, 50.0, 100.0], 4).unwrap().c_m0_estimate;
        assert!(a.is_finite() && a > 0.0 && b < 5.0 * a);
        assert!(estimate_growth(&cubic, 3.0, &[0.5], 3).is_err());
    }
}
