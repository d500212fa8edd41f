//! Integrators for the perturbed system, the effective equations, the
//! averaged action equation and their cut-off variants.
//!
//! Paths run in parallel, each on its own noise stream, and results are
//! collected in path order, so ensembles do not depend on the thread count.

pub mod ensemble;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use ensemble::{
    moment_diagnostic, moment_order, node_for_time, node_time, EnsembleData, EnsembleMeta, MomentReport, PathEnsemble,
    Record, RunParams,
};

use crate::averaging::{ActionCoefficients, ActionVector, AveragingMethod, Dispersion, EffectiveCoefficients};
use crate::error::{Error, Result};
use crate::model::{CompiledExpr, ComplexVec, DriftVariant, SystemSpec};
use crate::rng::{NoisePath, SeedLineage, STREAM_MAIN};

/// Largest admissible `dtau / epsilon` for the perturbed integrator.
pub const MAX_STEP_PER_EPS: f64 = 0.2;

/// Runs `f` for every path index and collects results in path order.
/// The error of the lowest failing path index wins.
pub(crate) fn par_paths<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let out: Vec<Result<T>> = (0..n).into_par_iter().map(f).collect();
    out.into_iter().collect()
}

fn check_finite(z: &[Complex64], path: usize, step: usize) -> Result<()> {
    if z.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { path, step })
    }
}

/// Stores node `j` into `buf` when it is the next recorded node.
struct Recorder<'a> {
    nodes: &'a [usize],
    next: usize,
}

impl<'a> Recorder<'a> {
    fn new(nodes: &'a [usize]) -> Self {
        Self { nodes, next: 0 }
    }

    fn wants(&mut self, j: usize) -> bool {
        if self.nodes.get(self.next) == Some(&j) {
            self.next += 1;
            true
        } else {
            false
        }
    }
}

fn meta(spec: &SystemSpec, integrator: &str, p: &RunParams, steps: usize) -> EnsembleMeta {
    EnsembleMeta {
        system_hash: spec.content_hash(),
        integrator: integrator.to_string(),
        dtau: p.dtau,
        t_end: p.t_end,
        steps,
        master_seed: p.seed,
        stream_id: STREAM_MAIN,
        n_paths: p.n_paths,
    }
}

/// One exponential-Euler step of the perturbed system.
#[derive(Debug, Clone)]
pub(crate) struct PerturbedKernel {
    n: usize,
    n1: usize,
    dtau: f64,
    drift: Vec<CompiledExpr>,
    psi: Vec<CompiledExpr>,
    psi_const: Option<Vec<Complex64>>,
    rot: Vec<Complex64>,
    fast: Vec<f64>,
}

impl PerturbedKernel {
    pub(crate) fn new(spec: &SystemSpec, dtau: f64) -> Result<Self> {
        let limit = MAX_STEP_PER_EPS * spec.epsilon();
        if dtau > limit * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { dtau, limit });
        }
        let n = spec.n();
        let fast: Vec<f64> = spec.freqs().as_slice().iter().map(|l| l / spec.epsilon()).collect();
        let psi: Vec<CompiledExpr> = spec.psi().iter().flatten().map(CompiledExpr::new).collect();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        let psi_const = spec.has_constant_psi().then(|| psi.iter().map(|e| e.eval(&zero)).collect());
        Ok(Self {
            n,
            n1: spec.noise_dim(),
            dtau,
            drift: spec.drift(DriftVariant::Full).iter().map(CompiledExpr::new).collect(),
            psi,
            psi_const,
            rot: fast.iter().map(|w| Complex64::cis(-w * dtau)).collect(),
            fast,
        })
    }

    /// `P(v) dtau` and `Psi(v) dbeta` written into `drift` and `noise`.
    fn increments(&self, v: &[Complex64], db: &[Complex64], psi_buf: &mut Vec<Complex64>, drift: &mut [Complex64], noise: &mut [Complex64]) {
        let psi: &[Complex64] = match &self.psi_const {
            Some(c) => c,
            None => {
                psi_buf.clear();
                psi_buf.extend(self.psi.iter().map(|e| e.eval(v)));
                psi_buf
            }
        };
        for k in 0..self.n {
            drift[k] = self.drift[k].eval(v) * self.dtau;
            noise[k] = (0..self.n1).map(|l| psi[k * self.n1 + l] * db[l]).sum();
        }
    }

    fn step(&self, v: &mut [Complex64], db: &[Complex64], s: &mut Scratch) {
        self.increments(v, db, &mut s.psi, &mut s.drift, &mut s.noise);
        for k in 0..self.n {
            v[k] = self.rot[k] * (v[k] + s.drift[k] + s.noise[k]);
        }
    }

    /// `a_k = exp(i tau lambda_k / eps) v_k` at node `j`.
    fn interaction<'a>(&'a self, v: &'a [Complex64], j: usize) -> impl Iterator<Item = Complex64> + 'a {
        let tau = node_time(j, self.dtau);
        v.iter().zip(&self.fast).map(move |(z, w)| z * Complex64::cis(w * tau))
    }
}

#[derive(Debug, Default)]
struct Scratch {
    psi: Vec<Complex64>,
    drift: Vec<Complex64>,
    noise: Vec<Complex64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self { psi: Vec::new(), drift: vec![Complex64::new(0.0, 0.0); n], noise: vec![Complex64::new(0.0, 0.0); n] }
    }
}

/// Paths of the perturbed system `v` and of its interaction representation `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedEnsemble {
    pub v: PathEnsemble,
    pub a: PathEnsemble,
}

/// Exponential Euler for the perturbed system: `v <- exp(-i Lambda dtau / eps) (v + P dtau + Psi dbeta)`.
pub fn simulate_perturbed(spec: &SystemSpec, v0: &ComplexVec, p: &RunParams) -> Result<PerturbedEnsemble> {
    v0.check_dim(spec.n())?;
    let steps = p.steps()?;
    let nodes = p.nodes()?;
    let kernel = PerturbedKernel::new(spec, p.dtau)?;
    let n = spec.n();
    let paths = par_paths(p.n_paths, |path| {
        let mut noise = NoisePath::new(SeedLineage::new(p.seed, path, STREAM_MAIN), p.dtau);
        let mut db = vec![Complex64::new(0.0, 0.0); spec.noise_dim()];
        let mut s = Scratch::new(n);
        let mut v = v0.to_vec();
        let mut rec = Recorder::new(&nodes);
        let mut vs = Vec::with_capacity(nodes.len() * n);
        let mut as_ = Vec::with_capacity(nodes.len() * n);
        if rec.wants(0) {
            vs.extend_from_slice(&v);
            as_.extend(kernel.interaction(&v, 0));
        }
        for j in 0..steps {
            noise.next_complex(&mut db);
            kernel.step(&mut v, &db, &mut s);
            check_finite(&v, path, j + 1)?;
            if rec.wants(j + 1) {
                vs.extend_from_slice(&v);
                as_.extend(kernel.interaction(&v, j + 1));
            }
        }
        Ok((vs, as_))
    })?;
    let (vs, as_): (Vec<_>, Vec<_>) = paths.into_iter().unzip();
    let m = meta(spec, "perturbed-exponential-euler", p, steps);
    let zeros = vec![0; p.n_paths];
    Ok(PerturbedEnsemble {
        v: PathEnsemble::new(m.clone(), n, nodes.clone(), EnsembleData::Complex(vs), zeros.clone()),
        a: PathEnsemble::new(
            EnsembleMeta { integrator: "perturbed-interaction".into(), ..m },
            n,
            nodes,
            EnsembleData::Complex(as_),
            zeros,
        ),
    })
}

/// Euler-Maruyama step of an effective equation, `a <- a + <<P>>(a) dtau + B(a) dbeta`.
#[derive(Debug, Clone)]
pub(crate) struct EffectiveStepper {
    coeffs: EffectiveCoefficients,
    constant_b: Option<Dispersion>,
    dtau: f64,
}

impl EffectiveStepper {
    pub(crate) fn new(spec: &SystemSpec, variant: DriftVariant, method: AveragingMethod, dtau: f64) -> Result<Self> {
        let coeffs = EffectiveCoefficients::new(spec, variant, method)?;
        let constant_b = coeffs.constant_dispersion();
        Ok(Self { coeffs, constant_b, dtau })
    }

    /// Advances `a` in place; returns the number of clamped eigenvalues.
    pub(crate) fn step(&self, a: &mut [Complex64], db: &[Complex64], inc: &mut [Complex64]) -> Result<usize> {
        let drift = self.coeffs.drift(a);
        inc.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        let clamped = match &self.constant_b {
            Some(b) => {
                b.apply(db, inc);
                0
            }
            None => {
                let (b, c) = self.coeffs.dispersion(a)?;
                b.apply(db, inc);
                c
            }
        };
        for k in 0..a.len() {
            a[k] += drift[k] * self.dtau + inc[k];
        }
        Ok(clamped)
    }
}

/// Trivial system `da = dbeta` used after the cut-off time.
pub(crate) fn trivial_step(a: &mut [Complex64], db: &[Complex64]) {
    for (x, d) in a.iter_mut().zip(db) {
        *x += d;
    }
}

pub(crate) fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Stopping times `tau_R`: first node with `|a|^2 >= R`, else `T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffState {
    pub r: f64,
    pub tau_r: Vec<f64>,
    /// Grid node of `tau_R`, `None` if the cut-off never triggered.
    pub node: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffEnsemble {
    pub ensemble: PathEnsemble,
    pub cutoff: CutoffState,
}

fn variant_name(v: DriftVariant) -> &'static str {
    match v {
        DriftVariant::Full => "full",
        DriftVariant::Modified => "modified",
    }
}

fn run_effective(
    spec: &SystemSpec,
    variant: DriftVariant,
    v0: &ComplexVec,
    p: &RunParams,
    method: AveragingMethod,
    r: Option<f64>,
) -> Result<(PathEnsemble, Vec<Option<usize>>)> {
    let n = spec.n();
    v0.check_dim(n)?;
    let steps = p.steps()?;
    let nodes = p.nodes()?;
    let stepper = EffectiveStepper::new(spec, variant, method, p.dtau)?;
    let paths = par_paths(p.n_paths, |path| {
        let mut noise = NoisePath::new(SeedLineage::new(p.seed, path, STREAM_MAIN), p.dtau);
        let mut db = vec![Complex64::new(0.0, 0.0); n];
        let mut inc = db.clone();
        let mut a = v0.to_vec();
        let mut rec = Recorder::new(&nodes);
        let mut out = Vec::with_capacity(nodes.len() * n);
        let mut clamps = 0;
        let mut hit = None;
        if rec.wants(0) {
            out.extend_from_slice(&a);
        }
        for j in 0..steps {
            noise.next_complex(&mut db);
            if hit.is_some() {
                trivial_step(&mut a, &db);
            } else {
                clamps += stepper.step(&mut a, &db, &mut inc)?;
            }
            check_finite(&a, path, j + 1)?;
            if let Some(r) = r {
                if hit.is_none() && norm_sqr(&a) >= r {
                    hit = Some(j + 1);
                }
            }
            if rec.wants(j + 1) {
                out.extend_from_slice(&a);
            }
        }
        Ok((out, clamps, hit))
    })?;
    let mut data = Vec::with_capacity(p.n_paths);
    let mut clamps = Vec::with_capacity(p.n_paths);
    let mut hits = Vec::with_capacity(p.n_paths);
    for (d, c, h) in paths {
        data.push(d);
        clamps.push(c);
        hits.push(h);
    }
    let id = match r {
        Some(_) => format!("cutoff-effective-{}-euler-maruyama", variant_name(variant)),
        None => format!("effective-{}-euler-maruyama", variant_name(variant)),
    };
    Ok((PathEnsemble::new(meta(spec, &id, p, steps), n, nodes, EnsembleData::Complex(data), clamps), hits))
}

/// Euler-Maruyama for the effective (`Full`) or modified effective (`Modified`) equation.
pub fn simulate_effective(
    spec: &SystemSpec,
    variant: DriftVariant,
    v0: &ComplexVec,
    p: &RunParams,
    method: AveragingMethod,
) -> Result<PathEnsemble> {
    Ok(run_effective(spec, variant, v0, p, method, None)?.0)
}

/// Effective equation switched to `da = dbeta` from the first node with `|a|^2 >= R`.
pub fn simulate_cutoff_effective(
    spec: &SystemSpec,
    variant: DriftVariant,
    v0: &ComplexVec,
    p: &RunParams,
    method: AveragingMethod,
    r: f64,
) -> Result<CutoffEnsemble> {
    if !(r > v0.norm_sqr()) {
        return Err(Error::InvalidArgument(format!("cut-off R = {r} must exceed |v0|^2 = {}", v0.norm_sqr())));
    }
    let (ensemble, hits) = run_effective(spec, variant, v0, p, method, Some(r))?;
    let tau_r = hits.iter().map(|h| h.map_or(p.t_end, |j| node_time(j, p.dtau))).collect();
    Ok(CutoffEnsemble { ensemble, cutoff: CutoffState { r, tau_r, node: hits } })
}

/// Euler-Maruyama for the averaged action equation, clamped at zero:
/// `I <- max(I + F(I) dtau + K(I) dW, 0)` with real increments `dW`.
pub fn simulate_action_sde(spec: &SystemSpec, i0: &ActionVector, p: &RunParams, method: AveragingMethod) -> Result<PathEnsemble> {
    let n = spec.n();
    if i0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: i0.len() });
    }
    let steps = p.steps()?;
    let nodes = p.nodes()?;
    let coeffs = ActionCoefficients::new(spec, method)?;
    let paths = par_paths(p.n_paths, |path| {
        let mut noise = NoisePath::new(SeedLineage::new(p.seed, path, STREAM_MAIN), p.dtau);
        let mut dw = vec![0.0; n];
        let mut inc = vec![0.0; n];
        let mut x = i0.as_slice().to_vec();
        let mut rec = Recorder::new(&nodes);
        let mut out = Vec::with_capacity(nodes.len() * n);
        let mut clamps = 0;
        if rec.wants(0) {
            out.extend_from_slice(&x);
        }
        for j in 0..steps {
            noise.next_real(&mut dw);
            let f = coeffs.drift(&x);
            let (k, c) = coeffs.dispersion(&x)?;
            clamps += c;
            inc.iter_mut().for_each(|z| *z = 0.0);
            k.apply_real(&dw, &mut inc);
            for i in 0..n {
                let y = x[i] + f[i] * p.dtau + inc[i];
                if !y.is_finite() {
                    return Err(Error::NonFinite { path, step: j + 1 });
                }
                if y < 0.0 {
                    clamps += 1;
                    x[i] = 0.0;
                } else {
                    x[i] = y;
                }
            }
            if rec.wants(j + 1) {
                out.extend_from_slice(&x);
            }
        }
        Ok((out, clamps))
    })?;
    let (data, clamps): (Vec<_>, Vec<_>) = paths.into_iter().unzip();
    Ok(PathEnsemble::new(meta(spec, "action-euler-maruyama-clamped", p, steps), n, nodes, EnsembleData::Action(data), clamps))
}

/// Sup over grid nodes and components of `|I(v(tau)) - I_ito(tau)|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItoReport {
    pub sup_error: f64,
    pub dtau: f64,
    pub steps: usize,
}

/// Integrates `dI_k = v_k.P_k dtau + v_k.(Psi dbeta)_k + sum_l |Psi_kl|^2 dtau` along one
/// perturbed path driven by `next_noise`, with `x.y = Re(x conj(y))`.
fn ito_along_path(
    kernel: &PerturbedKernel,
    v0: &[Complex64],
    steps: usize,
    mut next_noise: impl FnMut(&mut [Complex64]),
) -> Result<f64> {
    let n = kernel.n;
    let mut v = v0.to_vec();
    let mut actions: Vec<f64> = v.iter().map(|z| 0.5 * z.norm_sqr()).collect();
    let mut db = vec![Complex64::new(0.0, 0.0); kernel.n1];
    let mut s = Scratch::new(n);
    let mut sup: f64 = 0.0;
    for j in 0..steps {
        next_noise(&mut db);
        kernel.increments(&v, &db, &mut s.psi, &mut s.drift, &mut s.noise);
        for k in 0..n {
            let psi_sq: f64 = match &kernel.psi_const {
                Some(c) => c[k * kernel.n1..(k + 1) * kernel.n1].iter().map(|z| z.norm_sqr()).sum(),
                None => s.psi[k * kernel.n1..(k + 1) * kernel.n1].iter().map(|z| z.norm_sqr()).sum(),
            };
            actions[k] += (v[k] * s.drift[k].conj()).re + (v[k] * s.noise[k].conj()).re + psi_sq * kernel.dtau;
        }
        for k in 0..n {
            v[k] = kernel.rot[k] * (v[k] + s.drift[k] + s.noise[k]);
        }
        check_finite(&v, 0, j + 1)?;
        for k in 0..n {
            sup = sup.max((0.5 * v[k].norm_sqr() - actions[k]).abs());
        }
    }
    Ok(sup)
}

/// Compares the actions of one perturbed path with the Itô action SDE driven by the same increments.
pub fn ito_action_consistency(spec: &SystemSpec, v0: &ComplexVec, t_end: f64, dtau: f64, seed: u64) -> Result<ItoReport> {
    v0.check_dim(spec.n())?;
    let p = RunParams::new(t_end, dtau, 1, seed);
    let steps = p.steps()?;
    let kernel = PerturbedKernel::new(spec, dtau)?;
    let mut noise = NoisePath::new(SeedLineage::new(seed, 0, STREAM_MAIN), dtau);
    let sup_error = ito_along_path(&kernel, v0, steps, |db| noise.next_complex(db))?;
    Ok(ItoReport { sup_error, dtau, steps })
}

/// [`ito_action_consistency`] at `dtau, dtau/2, ..., dtau/2^(levels-1)` on one
/// Brownian path: coarse increments are sums of the finest ones.
pub fn ito_refinement(
    spec: &SystemSpec,
    v0: &ComplexVec,
    t_end: f64,
    dtau: f64,
    levels: usize,
    seed: u64,
) -> Result<Vec<ItoReport>> {
    v0.check_dim(spec.n())?;
    if levels == 0 || levels > 20 {
        return Err(Error::InvalidArgument(format!("levels = {levels} must lie in 1..=20")));
    }
    let fine_factor = 1usize << (levels - 1);
    let fine_dt = dtau / fine_factor as f64;
    let coarse_steps = RunParams::new(t_end, dtau, 1, seed).steps()?;
    let fine_steps = coarse_steps * fine_factor;
    let n1 = spec.noise_dim();
    let mut noise = NoisePath::new(SeedLineage::new(seed, 0, STREAM_MAIN), fine_dt);
    let mut fine = vec![Complex64::new(0.0, 0.0); fine_steps * n1];
    for chunk in fine.chunks_mut(n1) {
        noise.next_complex(chunk);
    }
    (0..levels)
        .map(|lvl| {
            let block = fine_factor >> lvl;
            let dt = fine_dt * block as f64;
            let kernel = PerturbedKernel::new(spec, dt)?;
            let steps = fine_steps / block;
            let mut j = 0;
            let sup_error = ito_along_path(&kernel, v0, steps, |db| {
                db.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                for b in 0..block {
                    let row = &fine[(j * block + b) * n1..(j * block + b + 1) * n1];
                    for (d, x) in db.iter_mut().zip(row) {
                        *d += x;
                    }
                }
                j += 1;
            })?;
            Ok(ItoReport { sup_error, dtau: dt, steps })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::system_from_strs;

    fn cv(pairs: &[(f64, f64)]) -> ComplexVec {
        ComplexVec::from_pairs(pairs).unwrap()
    }

    #[test]
    fn step_guard() {
        let sys = system_from_strs(&[1.0], 0.1, &["0"], None, &[&["0"]]).unwrap();
        let p = RunParams::new(1.0, 0.05, 1, 0);
        assert!(matches!(simulate_perturbed(&sys, &cv(&[(1.0, 0.0)]), &p), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn conservative_interaction_picture_is_constant() {
        let sys = system_from_strs(&[1.0, 2f64.sqrt()], 0.05, &["0", "0"], None, &[&["0"], &["0"]]).unwrap();
        let v0 = cv(&[(1.0, 0.5), (-0.3, 0.2)]);
        let e = simulate_perturbed(&sys, &v0, &RunParams::new(1.0, 0.01, 3, 1)).unwrap();
        for p in 0..3 {
            for idx in 0..e.a.times().len() {
                let a = e.a.complex_state(p, idx).unwrap();
                for k in 0..2 {
                    assert!((a[k] - v0[k]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn linear_decay() {
        let sys = system_from_strs(&[1.0], 0.01, &["-v1"], None, &[&["0"]]).unwrap();
        let v0 = cv(&[(1.0, 1.0)]);
        let e = simulate_perturbed(&sys, &v0, &RunParams::new(1.0, 1e-4, 1, 0).with_record(Record::Stride(1000))).unwrap();
        for (idx, t) in e.a.times().iter().enumerate() {
            let a = e.a.complex_state(0, idx).unwrap()[0];
            assert!((a.norm() - v0[0].norm() * (-t).exp()).abs() < 1e-3);
        }
    }

    #[test]
    fn modulus_identity() {
        let sys = system_from_strs(&[1.0, 2f64.sqrt()], 0.05, &["-v1", "-v2"], Some("abs2(v1)*abs2(v2)"), &[&["1", "0"], &["0", "1"]])
            .unwrap();
        let e = simulate_perturbed(&sys, &cv(&[(1.0, 0.0), (0.5, 0.5)]), &RunParams::new(1.0, 0.01, 4, 3)).unwrap();
        for p in 0..4 {
            for idx in 0..e.v.times().len() {
                let (v, a) = (e.v.complex_state(p, idx).unwrap(), e.a.complex_state(p, idx).unwrap());
                for k in 0..2 {
                    assert!((v[k].norm() - a[k].norm()).abs() <= 1e-14 * (1.0 + v[k].norm()));
                }
            }
        }
    }

    #[test]
    fn effective_deterministic_decay_and_variants() {
        let sys = system_from_strs(&[1.0], 0.1, &["-v1"], None, &[&["0"]]).unwrap();
        let v0 = cv(&[(2.0, 0.0)]);
        let p = RunParams::new(1.0, 1e-3, 2, 0).with_record(Record::Times(vec![1.0]));
        let e = simulate_effective(&sys, DriftVariant::Full, &v0, &p, AveragingMethod::Symbolic).unwrap();
        let a = e.complex_state(1, 0).unwrap()[0];
        assert!((a.re - 2.0 * (-1f64).exp()).abs() < 2e-3);
        let m = simulate_effective(&sys, DriftVariant::Modified, &v0, &p, AveragingMethod::Symbolic).unwrap();
        assert_eq!(e.data(), m.data());
    }

    #[test]
    fn cutoff_never_triggering_matches_effective() {
        let sys = system_from_strs(&[1.0, 2f64.sqrt()], 0.1, &["-v1", "-v2"], Some("abs2(v1)*abs2(v2)"), &[&["1", "0"], &["0", "1"]])
            .unwrap();
        let v0 = cv(&[(1.0, 0.0), (0.0, 1.0)]);
        let p = RunParams::new(1.0, 0.01, 8, 5);
        let e = simulate_effective(&sys, DriftVariant::Full, &v0, &p, AveragingMethod::Symbolic).unwrap();
        let c = simulate_cutoff_effective(&sys, DriftVariant::Full, &v0, &p, AveragingMethod::Symbolic, 1e9).unwrap();
        assert_eq!(e.data(), c.ensemble.data());
        assert!(c.cutoff.tau_r.iter().all(|&t| t == 1.0));
        assert!(c.cutoff.node.iter().all(Option::is_none));
        assert!(simulate_cutoff_effective(&sys, DriftVariant::Full, &v0, &p, AveragingMethod::Symbolic, 1.5).is_err());
    }

    #[test]
    fn action_sde_deterministic_decay() {
        let sys = system_from_strs(&[1.0], 0.1, &["-v1"], None, &[&["0"]]).unwrap();
        let p = RunParams::new(1.0, 1e-4, 1, 0).with_record(Record::Times(vec![0.5, 1.0]));
        let e = simulate_action_sde(&sys, &ActionVector::new(vec![1.0]).unwrap(), &p, AveragingMethod::Symbolic).unwrap();
        for (idx, t) in e.times().iter().enumerate() {
            assert!((e.action_state(0, idx)[0] - (-2.0 * t).exp()).abs() < 1e-3);
        }
    }

    #[test]
    fn ito_deterministic_case() {
        let sys = system_from_strs(&[1.0], 0.01, &["-v1"], None, &[&["0"]]).unwrap();
        let r = ito_action_consistency(&sys, &cv(&[(0.1, 0.0)]), 1.0, 1e-4, 0).unwrap();
        assert!(r.sup_error <= 1e-6, "{}", r.sup_error);
        assert_eq!(r.steps, 10_000);
    }

    #[test]
    fn ito_refinement_reuses_the_brownian_path() {
        let sys = system_from_strs(&[1.0], 0.1, &["0"], None, &[&["1"]]).unwrap();
        let v0 = cv(&[(1.0, 0.0)]);
        let levels = ito_refinement(&sys, &v0, 1.0, 0.01, 3, 9).unwrap();
        assert_eq!(levels.iter().map(|r| r.steps).collect::<Vec<_>>(), vec![100, 200, 400]);
        let direct = ito_action_consistency(&sys, &v0, 1.0, 0.0025, 9).unwrap();
        assert_eq!(direct.sup_error, levels[2].sup_error);
    }
}
