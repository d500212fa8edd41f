//! Shared fixtures for the `stochavg` benchmarks.

use stochavg::model::system_from_strs;
use stochavg::{ComplexVec, SystemSpec};

/// Complex OU pair with a quartic Hamiltonian coupling.
pub fn coupled_ou(eps: f64) -> SystemSpec {
    system_from_strs(&[1.0, 2f64.sqrt()], eps, &["-v1", "-v2"], Some("abs2(v1)*abs2(v2)"), &[&["1", "0"], &["0", "1"]]).expect("valid system")
}

pub fn start() -> ComplexVec {
    ComplexVec::from_reals(&[1.5, 1.5]).expect("finite start")
}

/// Deterministic scrambled sample of `n` points from a smooth law, shifted by `shift`.
pub fn scalar_sample(n: usize, shift: f64) -> Vec<f64> {
    (0..n).map(|i| ((((i * 7919) % n) as f64 + 0.5) / n as f64 * 6.0 - 3.0).tanh() + shift).collect()
}
