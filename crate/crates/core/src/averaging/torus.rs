//! Numerical integration over the torus `T^n = R^n / 2 pi Z^n`.
//!
//! The tensor-product rectangle rule with `g` nodes per dimension integrates
//! `exp(i m . w)` exactly whenever every `|m_j| < g`, which makes it exact on
//! trigonometric polynomials of degree below `g`. Nodes are visited in a fixed
//! odometer order (last coordinate fastest) and summed sequentially, so the
//! result does not depend on how callers schedule work.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// How the torus integral is discretized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TorusRule {
    /// Rectangle rule with `grid` nodes per dimension.
    Grid(usize),
    /// Uniform random angles; cross-check only.
    MonteCarlo { samples: usize, seed: u64 },
}

impl TorusRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TorusRule::Grid(g) if g < 2 => {
                Err(Error::InvalidArgument(format!("quadrature grid {g} < 2 per dimension")))
            }
            TorusRule::MonteCarlo { samples: 0, .. } => {
                Err(Error::InvalidArgument("monte carlo torus rule needs samples > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Averages an integrand over the torus.
///
/// For every node `w` the callback receives `v = Phi_{-w} a`, the phase
/// factors `exp(i w_k)`, and an accumulator of length `out_len` to add its
/// integrand values into. Returns the accumulated values divided by the node count.
pub fn torus_mean<F>(a: &[Complex64], rule: TorusRule, out_len: usize, mut integrand: F) -> Result<Vec<Complex64>>
where
    F: FnMut(&[Complex64], &[Complex64], &mut [Complex64]),
{
    rule.validate()?;
    let n = a.len();
    let mut acc = vec![Complex64::new(0.0, 0.0); out_len];
    let mut v = a.to_vec();
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    let count = match rule {
        TorusRule::Grid(g) => {
            let table: Vec<Complex64> =
                (0..g).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / g as f64)).collect();
            let mut idx = vec![0usize; n];
            let total = g.checked_pow(n as u32).ok_or_else(|| {
                Error::InvalidArgument(format!("grid {g}^{n} overflows"))
            })?;
            for _ in 0..total {
                for k in 0..n {
                    phases[k] = table[idx[k]];
                    v[k] = a[k] * phases[k].conj();
                }
                integrand(&v, &phases, &mut acc);
                for k in (0..n).rev() {
                    idx[k] += 1;
                    if idx[k] < g {
                        break;
                    }
                    idx[k] = 0;
                }
            }
            total
        }
        TorusRule::MonteCarlo { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                for k in 0..n {
                    phases[k] = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
                    v[k] = a[k] * phases[k].conj();
                }
                integrand(&v, &phases, &mut acc);
            }
            samples
        }
    };
    let w = 1.0 / count as f64;
    for x in &mut acc {
        *x *= w;
    }
    Ok(acc)
}
