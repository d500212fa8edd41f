use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for matching a requested time to a grid node, relative to `dtau`.
const NODE_TOL: f64 = 1e-6;

/// Which grid nodes an integrator keeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Record {
    All,
    /// Every `k`-th node plus the final node.
    Stride(usize),
    /// Nodes at the given times, which must lie on the grid.
    Times(Vec<f64>),
}

/// Grid, path count, seed and recording choice shared by all integrators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub t_end: f64,
    pub dtau: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub record: Record,
}

impl RunParams {
    pub fn new(t_end: f64, dtau: f64, n_paths: usize, seed: u64) -> Self {
        Self { t_end, dtau, n_paths, seed, record: Record::All }
    }

    pub fn with_record(mut self, record: Record) -> Self {
        self.record = record;
        self
    }

    /// Number of steps `M = T / dtau`; `T` must be a multiple of `dtau`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!("T = {} must be positive", self.t_end)));
        }
        if !(self.dtau > 0.0 && self.dtau.is_finite()) {
            return Err(Error::InvalidArgument(format!("dtau = {} must be positive", self.dtau)));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidArgument("n_paths must be positive".into()));
        }
        let m = (self.t_end / self.dtau).round();
        if m < 1.0 || (m * self.dtau - self.t_end).abs() > NODE_TOL * self.dtau {
            return Err(Error::InvalidArgument(format!("T = {} is not a multiple of dtau = {}", self.t_end, self.dtau)));
        }
        Ok(m as usize)
    }

    /// Sorted, deduplicated node indices to record.
    pub fn nodes(&self) -> Result<Vec<usize>> {
        let m = self.steps()?;
        let mut nodes: Vec<usize> = match &self.record {
            Record::All => (0..=m).collect(),
            Record::Stride(0) => return Err(Error::InvalidArgument("record stride must be positive".into())),
            Record::Stride(s) => (0..=m).step_by(*s).chain(std::iter::once(m)).collect(),
            Record::Times(ts) => ts.iter().map(|&t| node_for_time(t, self.dtau, m)).collect::<Result<_>>()?,
        };
        nodes.sort_unstable();
        nodes.dedup();
        Ok(nodes)
    }
}

/// Grid node at time `t`.
pub fn node_for_time(t: f64, dtau: f64, steps: usize) -> Result<usize> {
    let j = (t / dtau).round();
    if !(j >= 0.0 && j <= steps as f64) || (j * dtau - t).abs() > NODE_TOL * dtau {
        return Err(Error::InvalidArgument(format!("time {t} is not a grid node (dtau = {dtau}, T = {})", steps as f64 * dtau)));
    }
    Ok(j as usize)
}

/// Slow time of node `j`.
pub fn node_time(j: usize, dtau: f64) -> f64 {
    j as f64 * dtau
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub system_hash: String,
    pub integrator: String,
    pub dtau: f64,
    pub t_end: f64,
    pub steps: usize,
    pub master_seed: u64,
    pub stream_id: u64,
    pub n_paths: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleData {
    /// Per path, node-major `[node * dim + k]`.
    Complex(Vec<Vec<Complex64>>),
    Action(Vec<Vec<f64>>),
}

/// Sample paths on a shared grid, recorded at a subset of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub meta: EnsembleMeta,
    dim: usize,
    nodes: Vec<usize>,
    times: Vec<f64>,
    data: EnsembleData,
    /// Per path, number of clamping events (action nonnegativity or eigenvalue dust).
    pub clamp_events: Vec<usize>,
}

impl PathEnsemble {
    pub fn new(meta: EnsembleMeta, dim: usize, nodes: Vec<usize>, data: EnsembleData, clamp_events: Vec<usize>) -> Self {
        let times = nodes.iter().map(|&j| node_time(j, meta.dtau)).collect();
        Self { meta, dim, nodes, times, data, clamp_events }
    }

    pub fn n_paths(&self) -> usize {
        match &self.data {
            EnsembleData::Complex(p) => p.len(),
            EnsembleData::Action(p) => p.len(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn data(&self) -> &EnsembleData {
        &self.data
    }

    pub fn is_action(&self) -> bool {
        matches!(self.data, EnsembleData::Action(_))
    }

    /// Position of time `t` among the recorded nodes.
    pub fn index_of_time(&self, t: f64) -> Result<usize> {
        let j = node_for_time(t, self.meta.dtau, self.meta.steps)?;
        self.nodes
            .binary_search(&j)
            .map_err(|_| Error::InvalidArgument(format!("time {t} was not recorded")))
    }

    pub fn complex_state(&self, path: usize, idx: usize) -> Option<&[Complex64]> {
        match &self.data {
            EnsembleData::Complex(p) => Some(&p[path][idx * self.dim..(idx + 1) * self.dim]),
            EnsembleData::Action(_) => None,
        }
    }

    pub fn action_state(&self, path: usize, idx: usize) -> Vec<f64> {
        let r = idx * self.dim..(idx + 1) * self.dim;
        match &self.data {
            EnsembleData::Complex(p) => p[path][r].iter().map(|z| 0.5 * z.norm_sqr()).collect(),
            EnsembleData::Action(p) => p[path][r].to_vec(),
        }
    }

    /// Action vectors of every path at recorded index `idx`.
    pub fn actions_at(&self, idx: usize) -> Vec<Vec<f64>> {
        (0..self.n_paths()).map(|p| self.action_state(p, idx)).collect()
    }

    /// Complex states of every path at recorded index `idx`.
    pub fn complex_at(&self, idx: usize) -> Option<Vec<Vec<Complex64>>> {
        (0..self.n_paths()).map(|p| self.complex_state(p, idx).map(<[_]>::to_vec)).collect()
    }

    /// Copy holding actions `I_k = |a_k|^2 / 2` instead of complex states.
    pub fn to_actions(&self) -> PathEnsemble {
        let data = match &self.data {
            EnsembleData::Complex(p) => {
                EnsembleData::Action(p.iter().map(|s| s.iter().map(|z| 0.5 * z.norm_sqr()).collect()).collect())
            }
            EnsembleData::Action(p) => EnsembleData::Action(p.clone()),
        };
        PathEnsemble { data, ..self.clone() }
    }

    /// Long-format CSV: `path,time,k,re,im` or `path,time,k,I`, with `k` 1-based.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        match &self.data {
            EnsembleData::Complex(paths) => {
                writeln!(w, "path,time,k,re,im")?;
                for (p, s) in paths.iter().enumerate() {
                    for (i, t) in self.times.iter().enumerate() {
                        for k in 0..self.dim {
                            let z = s[i * self.dim + k];
                            writeln!(w, "{p},{t},{},{},{}", k + 1, z.re, z.im)?;
                        }
                    }
                }
            }
            EnsembleData::Action(paths) => {
                writeln!(w, "path,time,k,I")?;
                for (p, s) in paths.iter().enumerate() {
                    for (i, t) in self.times.iter().enumerate() {
                        for k in 0..self.dim {
                            writeln!(w, "{p},{t},{},{}", k + 1, s[i * self.dim + k])?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sampled `sup_tau E|v|^{2m}`, on all paths and on the first half.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub order: u32,
    pub sup_moment: f64,
    pub sup_moment_half: f64,
    pub n_paths: usize,
}

impl MomentReport {
    /// `|full / half - 1|`, the drift under path-count doubling.
    pub fn relative_change(&self) -> f64 {
        (self.sup_moment / self.sup_moment_half - 1.0).abs()
    }
}

/// Moment order `ceil(max(m0, 4)) + 1` for a growth degree `m0`.
pub fn moment_order(m0: f64) -> u32 {
    m0.max(4.0).ceil() as u32 + 1
}

/// Empirical moment diagnostic over the recorded nodes of a complex ensemble.
pub fn moment_diagnostic(ens: &PathEnsemble, m0: f64) -> MomentReport {
    let order = moment_order(m0);
    let n = ens.n_paths();
    let half = (n / 2).max(1);
    let mut sup_full: f64 = 0.0;
    let mut sup_half: f64 = 0.0;
    for idx in 0..ens.times().len() {
        let mut s = 0.0;
        let mut s_half = 0.0;
        for p in 0..n {
            let r2: f64 = ens.action_state(p, idx).iter().map(|i| 2.0 * i).sum();
            let x = r2.powi(order as i32);
            s += x;
            if p < half {
                s_half += x;
            }
        }
        sup_full = sup_full.max(s / n as f64);
        sup_half = sup_half.max(s_half / half as f64);
    }
    MomentReport { order, sup_moment: sup_full, sup_moment_half: sup_half, n_paths: n }
}
