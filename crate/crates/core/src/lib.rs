//! Stochastic averaging for perturbed linear systems with rotating fast phases.
//!
//! The crate simulates `dv_k + i eps^-1 lambda_k v_k dtau = P_k(v) dtau + sum_l Psi_kl(v) dbeta_l`,
//! builds its effective and averaged action equations by torus averaging,
//! couples the full and modified effective equations, and compares laws in
//! the bounded-Lipschitz metric.

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acceptance;
pub mod averaging;
pub mod coupling;
pub mod error;
pub mod hamiltonian;
pub mod model;
pub mod rng;
pub mod sde;
pub mod stats;

pub use num_complex::Complex64;
pub use averaging::{ActionVector, AveragingMethod, HermitianMatrix, RotationVector};
pub use error::{Error, Result};
pub use hamiltonian::HamiltonianSpec;
pub use model::{ComplexVec, DriftVariant, FieldExpr, Frequencies, Poly, PolyField, PsiKind, SystemSpec};
