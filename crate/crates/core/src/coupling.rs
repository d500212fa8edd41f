//! Coupling of the cut-off effective equation with the cut-off modified
//! effective equation, glued along stopping times of the smallest action.
//!
//! The reference process `a_R` solves the cut-off effective equation. The
//! coupled process follows the cut-off modified equation with its own noise
//! while every action exceeds `delta` (a Lambda segment). Once the smallest
//! action drops to `delta` it copies a rotated `a_R` (a Delta segment) until
//! the smallest action is back above `2 delta`.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::averaging::{AveragingMethod, RotationVector};
use crate::error::{Error, Result};
use crate::model::{ComplexVec, DriftVariant, SystemSpec};
use crate::rng::{NoisePath, SeedLineage, STREAM_COUPLED, STREAM_MAIN};
use crate::sde::{node_time, par_paths, trivial_step, EffectiveStepper, EnsembleData, EnsembleMeta, PathEnsemble, RunParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    Lambda,
    Delta,
}

impl SegmentKind {
    pub fn name(self) -> &'static str {
        match self {
            SegmentKind::Lambda => "Lambda",
            SegmentKind::Delta => "Delta",
        }
    }
}

/// Grid nodes `[start, end]`; consecutive segments share their boundary node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSchedule {
    pub delta: f64,
    pub dtau: f64,
    pub steps: usize,
    pub paths: Vec<Vec<Segment>>,
}

impl SegmentSchedule {
    pub fn upper(&self) -> f64 {
        2.0 * self.delta
    }

    pub fn segment_counts(&self) -> Vec<usize> {
        self.paths.iter().map(Vec::len).collect()
    }

    /// Segments start at 0, end at the last node, alternate in kind starting
    /// with Lambda, and each begins where the previous one ends.
    pub fn tiles(&self) -> bool {
        self.paths.iter().all(|segs| {
            let Some(first) = segs.first() else { return false };
            first.start == 0
                && first.kind == SegmentKind::Lambda
                && segs.last().is_some_and(|s| s.end == self.steps)
                && segs.iter().all(|s| s.start < s.end || (s.start == s.end && segs.len() == 1))
                && segs.windows(2).all(|w| w[0].end == w[1].start && w[0].kind != w[1].kind)
        })
    }

    /// CSV `path,seg_index,kind,start_time,end_time`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "path,seg_index,kind,start_time,end_time")?;
        for (p, segs) in self.paths.iter().enumerate() {
            for (i, s) in segs.iter().enumerate() {
                writeln!(w, "{p},{i},{},{},{}", s.kind.name(), node_time(s.start, self.dtau), node_time(s.end, self.dtau))?;
            }
        }
        Ok(())
    }
}

/// Matching rotation at the start of a Delta segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationEntry {
    pub path: usize,
    pub seg_index: usize,
    pub node: usize,
    pub theta: RotationVector,
    /// Coupled state just before the copy.
    pub coupled_before: Vec<Complex64>,
    pub reference: Vec<Complex64>,
    /// Largest wrapped phase gap between the rotated reference and the pre-copy coupled state.
    pub phase_residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RotationLog {
    pub entries: Vec<RotationEntry>,
}

impl RotationLog {
    pub fn max_phase_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.phase_residual).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    pub t_end: f64,
    pub dtau: f64,
    pub delta: f64,
    pub r: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub method: AveragingMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingDiagnostics {
    pub segment_counts: Vec<usize>,
    pub tiles: bool,
    /// Largest one-step overshoot past a threshold at a switching node.
    pub max_overshoot: f64,
    pub max_phase_residual: f64,
    /// Largest `|I~_k - I_k(a_R)|` over Delta nodes; zero by construction.
    pub max_delta_action_gap: f64,
    /// Paths whose reference or coupled process reached the cut-off.
    pub reference_cutoffs: usize,
    pub coupled_cutoffs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun {
    /// Complex coupled states at every node.
    pub coupled: PathEnsemble,
    pub reference: PathEnsemble,
    /// Actions of the coupled process; on Delta nodes taken from the reference moduli.
    pub coupled_actions: PathEnsemble,
    pub reference_actions: PathEnsemble,
    pub schedule: SegmentSchedule,
    pub rotations: RotationLog,
    pub diagnostics: CouplingDiagnostics,
}

fn action(r: f64) -> f64 {
    0.5 * r * r
}

fn min_action(z: &[Complex64]) -> f64 {
    z.iter().map(|x| action(x.norm())).fold(f64::INFINITY, f64::min)
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    y.abs()
}

struct PathOut {
    coupled: Vec<Complex64>,
    reference: Vec<Complex64>,
    coupled_i: Vec<f64>,
    reference_i: Vec<f64>,
    segments: Vec<Segment>,
    rotations: Vec<RotationEntry>,
    overshoot: f64,
    gap: f64,
    ref_cut: bool,
    cpl_cut: bool,
}

/// Builds the coupled process on every path.
pub fn build_coupled(spec: &SystemSpec, v0: &ComplexVec, cfg: &CouplingConfig) -> Result<CoupledRun> {
    let n = spec.n();
    v0.check_dim(n)?;
    if !(cfg.delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta = {} must be positive", cfg.delta)));
    }
    if min_action(v0) <= cfg.delta {
        return Err(Error::InvalidArgument(format!("min action of v0 = {} must exceed delta = {}", min_action(v0), cfg.delta)));
    }
    if !(cfg.r > v0.norm_sqr()) {
        return Err(Error::InvalidArgument(format!("cut-off R = {} must exceed |v0|^2 = {}", cfg.r, v0.norm_sqr())));
    }
    let p = RunParams::new(cfg.t_end, cfg.dtau, cfg.n_paths, cfg.seed);
    let steps = p.steps()?;
    let full = EffectiveStepper::new(spec, DriftVariant::Full, cfg.method, cfg.dtau)?;
    let modified = EffectiveStepper::new(spec, DriftVariant::Modified, cfg.method, cfg.dtau)?;
    let (delta, upper) = (cfg.delta, 2.0 * cfg.delta);
    let zero = Complex64::new(0.0, 0.0);

    let outs = par_paths(cfg.n_paths, |path| {
        let mut main = NoisePath::new(SeedLineage::new(cfg.seed, path, STREAM_MAIN), cfg.dtau);
        let mut fresh = NoisePath::new(SeedLineage::new(cfg.seed, path, STREAM_COUPLED), cfg.dtau);
        let mut db = vec![zero; n];
        let mut inc = vec![zero; n];
        let mut a = v0.to_vec();
        let mut b = v0.to_vec();
        let mut b_mod = vec![0.0; n];
        let (mut ref_cut, mut cpl_cut) = (false, false);
        let mut kind = SegmentKind::Lambda;
        let mut seg_start = 0;
        let mut theta = vec![0.0; n];
        let mut out = PathOut {
            coupled: Vec::with_capacity((steps + 1) * n),
            reference: Vec::with_capacity((steps + 1) * n),
            coupled_i: Vec::with_capacity((steps + 1) * n),
            reference_i: Vec::with_capacity((steps + 1) * n),
            segments: Vec::new(),
            rotations: Vec::new(),
            overshoot: 0.0,
            gap: 0.0,
            ref_cut: false,
            cpl_cut: false,
        };
        for j in 0..=steps {
            if j > 0 {
                main.next_complex(&mut db);
                if ref_cut {
                    trivial_step(&mut a, &db);
                } else {
                    full.step(&mut a, &db, &mut inc)?;
                }
                if a.iter().any(|z| !z.is_finite()) {
                    return Err(Error::NonFinite { path, step: j });
                }
                ref_cut |= crate::sde::norm_sqr(&a) >= cfg.r;
                if kind == SegmentKind::Lambda {
                    fresh.next_complex(&mut db);
                    if cpl_cut {
                        trivial_step(&mut b, &db);
                    } else {
                        modified.step(&mut b, &db, &mut inc)?;
                    }
                    if b.iter().any(|z| !z.is_finite()) {
                        return Err(Error::NonFinite { path, step: j });
                    }
                    cpl_cut |= crate::sde::norm_sqr(&b) >= cfg.r;
                }
            }
            let r_mod: Vec<f64> = a.iter().map(|z| z.norm()).collect();
            match kind {
                SegmentKind::Lambda => {
                    let m = min_action(&b);
                    if m <= delta && j < steps {
                        out.overshoot = out.overshoot.max(delta - m);
                        for k in 0..n {
                            theta[k] = b[k].arg() - a[k].arg();
                        }
                        let rot = RotationVector::new(theta.clone())?;
                        let residual = (0..n).map(|k| wrap((a[k] * Complex64::cis(rot.as_slice()[k])).arg() - b[k].arg())).fold(0.0, f64::max);
                        out.rotations.push(RotationEntry {
                            path,
                            seg_index: out.segments.len() + 1,
                            node: j,
                            theta: rot,
                            coupled_before: b.clone(),
                            reference: a.clone(),
                            phase_residual: residual,
                        });
                        out.segments.push(Segment { kind, start: seg_start, end: j });
                        kind = SegmentKind::Delta;
                        seg_start = j;
                    }
                }
                SegmentKind::Delta => {
                    if j > seg_start && j < steps && min_action(&a) >= upper {
                        out.overshoot = out.overshoot.max(min_action(&a) - upper);
                        out.segments.push(Segment { kind, start: seg_start, end: j });
                        kind = SegmentKind::Lambda;
                        seg_start = j;
                    }
                }
            }
            let on_delta = kind == SegmentKind::Delta || out.segments.last().is_some_and(|s| s.kind == SegmentKind::Delta && s.end == j);
            if on_delta {
                for k in 0..n {
                    b[k] = Complex64::from_polar(r_mod[k], a[k].arg() + theta[k]);
                    b_mod[k] = r_mod[k];
                }
            } else {
                for k in 0..n {
                    b_mod[k] = b[k].norm();
                }
            }
            out.coupled.extend_from_slice(&b);
            out.reference.extend_from_slice(&a);
            out.reference_i.extend(r_mod.iter().map(|&r| action(r)));
            out.coupled_i.extend(b_mod.iter().map(|&r| action(r)));
            if on_delta {
                let gap = (0..n).map(|k| (action(b_mod[k]) - action(r_mod[k])).abs()).fold(0.0, f64::max);
                out.gap = out.gap.max(gap);
            }
        }
        out.segments.push(Segment { kind, start: seg_start, end: steps });
        out.ref_cut = ref_cut;
        out.cpl_cut = cpl_cut;
        Ok(out)
    })?;

    let nodes: Vec<usize> = (0..=steps).collect();
    let mk = |integrator: &str, stream_id| EnsembleMeta {
        system_hash: spec.content_hash(),
        integrator: integrator.into(),
        dtau: cfg.dtau,
        t_end: cfg.t_end,
        steps,
        master_seed: cfg.seed,
        stream_id,
        n_paths: cfg.n_paths,
    };
    let zeros = vec![0; cfg.n_paths];
    let mut coupled = Vec::with_capacity(cfg.n_paths);
    let mut reference = Vec::with_capacity(cfg.n_paths);
    let mut coupled_i = Vec::with_capacity(cfg.n_paths);
    let mut reference_i = Vec::with_capacity(cfg.n_paths);
    let mut segments = Vec::with_capacity(cfg.n_paths);
    let mut rotations = RotationLog::default();
    let (mut overshoot, mut gap, mut ref_cuts, mut cpl_cuts) = (0.0f64, 0.0f64, 0, 0);
    for o in outs {
        coupled.push(o.coupled);
        reference.push(o.reference);
        coupled_i.push(o.coupled_i);
        reference_i.push(o.reference_i);
        segments.push(o.segments);
        rotations.entries.extend(o.rotations);
        overshoot = overshoot.max(o.overshoot);
        gap = gap.max(o.gap);
        ref_cuts += o.ref_cut as usize;
        cpl_cuts += o.cpl_cut as usize;
    }
    let schedule = SegmentSchedule { delta: cfg.delta, dtau: cfg.dtau, steps, paths: segments };
    let diagnostics = CouplingDiagnostics {
        segment_counts: schedule.segment_counts(),
        tiles: schedule.tiles(),
        max_overshoot: overshoot,
        max_phase_residual: rotations.max_phase_residual(),
        max_delta_action_gap: gap,
        reference_cutoffs: ref_cuts,
        coupled_cutoffs: cpl_cuts,
    };
    Ok(CoupledRun {
        coupled: PathEnsemble::new(mk("coupled-modified", STREAM_COUPLED), n, nodes.clone(), EnsembleData::Complex(coupled), zeros.clone()),
        reference: PathEnsemble::new(mk("cutoff-effective-full", STREAM_MAIN), n, nodes.clone(), EnsembleData::Complex(reference), zeros.clone()),
        coupled_actions: PathEnsemble::new(mk("coupled-modified", STREAM_COUPLED), n, nodes.clone(), EnsembleData::Action(coupled_i), zeros.clone()),
        reference_actions: PathEnsemble::new(mk("cutoff-effective-full", STREAM_MAIN), n, nodes, EnsembleData::Action(reference_i), zeros),
        schedule,
        rotations,
        diagnostics,
    })
}

/// Largest `|I~_k - I_k(a_R)|` over all Delta nodes of all paths.
pub fn delta_segment_action_gap(run: &CoupledRun) -> f64 {
    let n = run.coupled_actions.dim();
    let mut gap = 0.0f64;
    for (p, segs) in run.schedule.paths.iter().enumerate() {
        for s in segs.iter().filter(|s| s.kind == SegmentKind::Delta) {
            for j in s.start..=s.end {
                let c = run.coupled_actions.action_state(p, j);
                let r = run.reference_actions.action_state(p, j);
                for k in 0..n {
                    gap = gap.max((c[k] - r[k]).abs());
                }
            }
        }
    }
    gap
}

/// Occupation estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupationPoint {
    pub delta: f64,
    pub estimate: f64,
    pub se: f64,
}

fn occupation_per_path(ens: &PathEnsemble, delta: f64, k: usize, up_to: Option<&[f64]>) -> Result<Vec<f64>> {
    if k >= ens.dim() {
        return Err(Error::DimensionMismatch { expected: ens.dim(), got: k + 1 });
    }
    if let Some(u) = up_to {
        if u.len() != ens.n_paths() {
            return Err(Error::DimensionMismatch { expected: ens.n_paths(), got: u.len() });
        }
    }
    let times = ens.times();
    Ok((0..ens.n_paths())
        .map(|p| {
            let stop = up_to.map_or(f64::INFINITY, |u| u[p]);
            times
                .windows(2)
                .enumerate()
                .filter(|(j, w)| w[0] < stop && ens.action_state(p, *j)[k] <= delta)
                .map(|(_, w)| w[1].min(stop) - w[0])
                .sum()
        })
        .collect())
}

/// `E int_0^{tau_R} 1{I_k <= delta} dtau` by a left Riemann sum over the recorded nodes.
/// `k` is a 0-based component index; `up_to` holds per-path stopping times.
pub fn occupation_time(ens: &PathEnsemble, delta: f64, k: usize, up_to: Option<&[f64]>) -> Result<f64> {
    let v = occupation_per_path(ens, delta, k, up_to)?;
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// Occupation estimates over several thresholds.
pub fn occupation_profile(ens: &PathEnsemble, deltas: &[f64], k: usize, up_to: Option<&[f64]>) -> Result<Vec<OccupationPoint>> {
    deltas
        .iter()
        .map(|&delta| {
            let v = occupation_per_path(ens, delta, k, up_to)?;
            let (estimate, se) = crate::stats::mean_se(&v);
            Ok(OccupationPoint { delta, estimate, se })
        })
        .collect()
}
