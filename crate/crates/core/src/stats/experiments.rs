//! Mixing profiles and epsilon sweeps built on the distance estimators.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{bl_distance_nd, DistanceReport, EmpiricalLaw, ReportOptions};
use crate::averaging::AveragingMethod;
use crate::error::{Error, Result};
use crate::model::{ComplexVec, DriftVariant, SystemSpec};
use crate::rng::derive_seed;
use crate::sde::{simulate_effective, simulate_perturbed, Record, RunParams};

/// Seed of an ensemble started from `v`: equal starts share noise, distinct starts do not.
pub fn seed_for_start(seed: u64, v: &ComplexVec) -> u64 {
    v.iter().fold(seed, |s, z| derive_seed(derive_seed(s, z.re.to_bits()), z.im.to_bits()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingConfig {
    pub t_end: f64,
    pub dtau: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    /// Declared radius bound on the initial conditions.
    pub m_bound: f64,
    pub method: AveragingMethod,
    pub report: ReportOptions,
}

/// Distances between the state laws of two effective ensembles started at `v1` and `v2`.
pub fn mixing_profile(spec: &SystemSpec, variant: DriftVariant, v1: &ComplexVec, v2: &ComplexVec, cfg: &MixingConfig) -> Result<Vec<DistanceReport>> {
    for v in [v1, v2] {
        if v.norm_sqr().sqrt() > cfg.m_bound {
            return Err(Error::InvalidArgument(format!("|v| = {} exceeds M = {}", v.norm_sqr().sqrt(), cfg.m_bound)));
        }
    }
    let run = |v: &ComplexVec| {
        let p = RunParams::new(cfg.t_end, cfg.dtau, cfg.n_paths, seed_for_start(cfg.seed, v)).with_record(Record::Times(cfg.times.clone()));
        simulate_effective(spec, variant, v, &p, cfg.method)
    };
    let (e1, e2) = (run(v1)?, run(v2)?);
    (0..cfg.times.len())
        .map(|i| {
            let l1 = EmpiricalLaw::states(&e1, i)?;
            let l2 = EmpiricalLaw::states(&e2, i)?;
            bl_distance_nd(&l1, &l2, &cfg.report)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    /// Strictly decreasing.
    pub eps_list: Vec<f64>,
    pub t_end: f64,
    pub n_paths: usize,
    pub times: Vec<f64>,
    pub seed: u64,
    /// Perturbed runs use `dtau = step_per_eps * eps`.
    pub step_per_eps: f64,
    pub method: AveragingMethod,
    pub report: ReportOptions,
}

impl ConvergenceConfig {
    pub fn new(eps_list: Vec<f64>, t_end: f64, n_paths: usize, times: Vec<f64>, seed: u64) -> Self {
        Self {
            eps_list,
            t_end,
            n_paths,
            times,
            seed,
            step_per_eps: crate::sde::MAX_STEP_PER_EPS,
            method: AveragingMethod::Symbolic,
            report: ReportOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub time: f64,
    pub metric: String,
    #[serde(flatten)]
    pub report: DistanceReport,
}

/// Action-law distances between the perturbed system at each `eps` and the effective equation.
pub fn convergence_table(spec: &SystemSpec, v0: &ComplexVec, cfg: &ConvergenceConfig) -> Result<Vec<ConvergenceRow>> {
    if cfg.eps_list.is_empty() || cfg.eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("eps_list must hold positive values".into()));
    }
    if cfg.eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("eps_list must be strictly decreasing".into()));
    }
    let record = Record::Times(cfg.times.clone());
    let eps_min = *cfg.eps_list.last().expect("nonempty");
    let pe = RunParams::new(cfg.t_end, cfg.step_per_eps * eps_min, cfg.n_paths, derive_seed(cfg.seed, 0)).with_record(record.clone());
    let eff = simulate_effective(spec, DriftVariant::Full, v0, &pe, cfg.method)?;
    let mut rows = Vec::new();
    for (i, &eps) in cfg.eps_list.iter().enumerate() {
        let se = spec.with_epsilon(eps)?;
        let pp = RunParams::new(cfg.t_end, cfg.step_per_eps * eps, cfg.n_paths, derive_seed(cfg.seed, i as u64 + 1)).with_record(record.clone());
        let pert = simulate_perturbed(&se, v0, &pp)?;
        for (k, &t) in cfg.times.iter().enumerate() {
            let l1 = EmpiricalLaw::actions(&pert.a, k)?;
            let l2 = EmpiricalLaw::actions(&eff, k)?;
            let report = bl_distance_nd(&l1, &l2, &cfg.report)?;
            rows.push(ConvergenceRow { eps, time: t, metric: "bl_action".into(), report });
        }
    }
    Ok(rows)
}

/// CSV `eps,time,metric,estimate,ci_lo,ci_hi,noise_floor`.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut w: W) -> io::Result<()> {
    writeln!(w, "eps,time,metric,estimate,ci_lo,ci_hi,noise_floor")?;
    for r in rows {
        let d = &r.report;
        writeln!(w, "{},{},{},{},{},{},{}", r.eps, r.time, r.metric, d.estimate, d.ci_lo, d.ci_hi, d.noise_floor)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::system_from_strs;

    fn quick(n: usize) -> ReportOptions {
        ReportOptions { bootstrap: 10, ..ReportOptions::default() }.with_seed(n as u64)
    }

    #[test]
    fn mixing_with_equal_starts_is_zero() {
        let spec = system_from_strs(&[1.0, 2f64.sqrt()], 0.1, &["-v1", "-v2"], None, &[&["1", "0"], &["0", "1"]]).unwrap();
        let v = ComplexVec::from_reals(&[1.0, 0.5]).unwrap();
        let cfg = MixingConfig {
            t_end: 1.0,
            dtau: 0.01,
            n_paths: 64,
            seed: 3,
            times: vec![0.5, 1.0],
            m_bound: 4.0,
            method: AveragingMethod::Symbolic,
            report: quick(0),
        };
        let r = mixing_profile(&spec, DriftVariant::Full, &v, &v, &cfg).unwrap();
        assert!(r.iter().all(|d| d.estimate == 0.0));
        let far = ComplexVec::from_reals(&[5.0, 0.0]).unwrap();
        assert!(mixing_profile(&spec, DriftVariant::Full, &v, &far, &cfg).is_err());
    }

    #[test]
    fn deterministic_decay_matches_point_masses() {
        let spec = system_from_strs(&[1.0], 0.1, &["-v1"], None, &[&["0"]]).unwrap();
        let (v1, v2) = (ComplexVec::from_reals(&[2.0]).unwrap(), ComplexVec::from_reals(&[0.0]).unwrap());
        let cfg = MixingConfig {
            t_end: 2.0,
            dtau: 0.001,
            n_paths: 4,
            seed: 1,
            times: vec![0.5, 1.0, 2.0],
            m_bound: 2.0,
            method: AveragingMethod::Symbolic,
            report: quick(0),
        };
        let r = mixing_profile(&spec, DriftVariant::Full, &v1, &v2, &cfg).unwrap();
        for (d, t) in r.iter().zip(&cfg.times) {
            // Euler with step h decays by (1 - h) per step
            let x = 2.0 * (1.0 - cfg.dtau).powf(t / cfg.dtau);
            assert!((d.estimate - 2.0 * x / (2.0 + x)).abs() < 1e-6, "{t}: {}", d.estimate);
        }
        assert!(r.windows(2).all(|w| w[1].estimate < w[0].estimate));
    }

    #[test]
    fn frozen_system_has_zero_distances() {
        let spec = system_from_strs(&[1.0, 2f64.sqrt()], 0.2, &["0", "0"], None, &[&["0", "0"], &["0", "0"]]).unwrap();
        let v0 = ComplexVec::from_reals(&[1.0, 2.0]).unwrap();
        let mut cfg = ConvergenceConfig::new(vec![0.2, 0.1], 0.4, 8, vec![0.2, 0.4], 5);
        cfg.report = quick(0);
        let rows = convergence_table(&spec, &v0, &cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.report.estimate < 1e-12 && r.metric == "bl_action"));
        let mut buf = Vec::new();
        write_convergence_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("eps,time,metric,estimate,ci_lo,ci_hi,noise_floor\n0.2,0.2,bl_action,"));
        cfg.eps_list = vec![0.1, 0.2];
        assert!(convergence_table(&spec, &v0, &cfg).is_err());
    }
}
