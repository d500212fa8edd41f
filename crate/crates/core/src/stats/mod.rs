//! Empirical laws and bounded-Lipschitz distances between them.
//!
//! The test class is `Lip(f) + sup|f| <= 1`. On the line the distance is
//! computed exactly; in higher dimension the reported value is a lower bound
//! built from ramp features, exact coordinate marginals and the exact distance
//! along the mean-difference direction.

pub mod bl1d;
pub mod experiments;

use std::cmp::Ordering;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bl1d::bl_exact_1d;
pub use experiments::{convergence_table, mixing_profile, seed_for_start, write_convergence_csv, ConvergenceConfig, ConvergenceRow, MixingConfig};

use crate::error::{Error, Result};
use crate::rng::{SeedLineage, STREAM_STATS};
use crate::sde::PathEnsemble;

/// Bootstrap resamples per report.
pub const DEFAULT_BOOTSTRAP: usize = 200;
/// Ramp features per n-dimensional report.
pub const DEFAULT_FEATURES: usize = 64;
/// Two-sided level of the bootstrap percentile interval.
pub const CI_LEVEL: f64 = 0.90;
/// Outer-search tolerance inside bootstrap resamples.
const RESAMPLE_TOL: f64 = 1e-6;

/// A finite sample of points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLaw {
    dim: usize,
    points: Vec<f64>,
    pub time_tag: f64,
    pub source: String,
}

impl EmpiricalLaw {
    pub fn new(dim: usize, points: Vec<f64>, time_tag: f64, source: impl Into<String>) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!("{} values do not form rows of dimension {dim}", points.len())));
        }
        if points.len() / dim < 2 {
            return Err(Error::InvalidArgument("an empirical law needs at least 2 points".into()));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("empirical law has non-finite points".into()));
        }
        Ok(Self { dim, points, time_tag, source: source.into() })
    }

    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(1, xs.to_vec(), 0.0, "")
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("rows have different lengths".into()));
        }
        Self::new(dim, rows.concat(), 0.0, "")
    }

    /// Actions of every path at recorded index `idx`.
    pub fn actions(ens: &PathEnsemble, idx: usize) -> Result<Self> {
        let pts = ens.actions_at(idx).concat();
        Self::new(ens.dim(), pts, ens.times()[idx], ens.meta.system_hash.clone())
    }

    /// Complex states of every path at `idx`, flattened to `(re, im)` pairs.
    pub fn states(ens: &PathEnsemble, idx: usize) -> Result<Self> {
        let rows = ens
            .complex_at(idx)
            .ok_or_else(|| Error::InvalidArgument("ensemble holds actions, not states".into()))?;
        let pts = rows.iter().flat_map(|r| r.iter().flat_map(|z: &Complex64| [z.re, z.im])).collect();
        Self::new(2 * ens.dim(), pts, ens.times()[idx], ens.meta.system_hash.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.points.iter().skip(j).step_by(self.dim).copied().collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        mean_rows(&self.points, self.dim)
    }

    /// First `floor(N/2)` rows and the rest.
    pub fn halves(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.len() / 2 * self.dim;
        (self.points[..h].to_vec(), self.points[h..].to_vec())
    }
}

fn mean_rows(points: &[f64], dim: usize) -> Vec<f64> {
    let n = (points.len() / dim) as f64;
    let mut m = vec![0.0; dim];
    for r in points.chunks(dim) {
        for (a, x) in m.iter_mut().zip(r) {
            *a += x;
        }
    }
    m.iter_mut().for_each(|a| *a /= n);
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMethod {
    Exact1d,
    LowerBoundNd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub estimate: f64,
    pub method: DistanceMethod,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub noise_floor: f64,
    /// Exact distances of the coordinate marginals.
    pub marginals: Vec<f64>,
    pub n1: usize,
    pub n2: usize,
    pub bootstrap: usize,
    pub seed: u64,
}

/// Tuning of distance reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub bootstrap: usize,
    pub feature_count: usize,
    pub seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { bootstrap: DEFAULT_BOOTSTRAP, feature_count: DEFAULT_FEATURES, seed: 0 }
    }
}

impl ReportOptions {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Rows sorted lexicographically so that estimates ignore sample order.
fn canonical_rows(points: &[f64], dim: usize) -> Vec<f64> {
    let mut rows: Vec<&[f64]> = points.chunks(dim).collect();
    rows.sort_by(|a, b| cmp_rows(a, b));
    rows.concat()
}

fn cmp_rows(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(a.len().cmp(&b.len()))
}

/// Ramp test functions `x -> clamp(k (u.x - b), -1, 1) / (1 + k)`, which satisfy
/// `Lip + sup = 1` for unit `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct RampFeatures {
    dim: usize,
    dirs: Vec<f64>,
    offsets: Vec<f64>,
    slopes: Vec<f64>,
}

impl RampFeatures {
    /// Random directions; offsets at projections of random pooled points; slopes log-uniform in `[1/4, 16]`.
    fn generate(dim: usize, count: usize, seed: u64, pooled: &[f64]) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = pooled.len() / dim;
        let mut dirs = Vec::with_capacity(count * dim);
        let mut offsets = Vec::with_capacity(count);
        let mut slopes = Vec::with_capacity(count);
        for _ in 0..count {
            let mut u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            u.iter_mut().for_each(|x| *x /= norm);
            let r = rng.gen_range(0..n);
            offsets.push(dot(&u, &pooled[r * dim..(r + 1) * dim]));
            slopes.push(2f64.powf(rng.gen_range(-2.0..4.0)));
            dirs.extend(u);
        }
        Self { dim, dirs, offsets, slopes }
    }

    fn value(&self, f: usize, x: &[f64]) -> f64 {
        let k = self.slopes[f];
        let p = dot(&self.dirs[f * self.dim..(f + 1) * self.dim], x);
        (k * (p - self.offsets[f])).clamp(-1.0, 1.0) / (1.0 + k)
    }

    fn best_gap(&self, a: &[f64], b: &[f64]) -> f64 {
        let count = self.offsets.len();
        let mean = |pts: &[f64], f: usize| pts.chunks(self.dim).map(|x| self.value(f, x)).sum::<f64>() / (pts.len() / self.dim) as f64;
        (0..count).map(|f| (mean(a, f) - mean(b, f)).abs()).fold(0.0, f64::max)
    }
}

fn dot(u: &[f64], x: &[f64]) -> f64 {
    u.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Point estimate and marginal distances for canonical, ordered inputs.
fn nd_value(a: &[f64], b: &[f64], dim: usize, features: Option<&RampFeatures>, tol: f64) -> (f64, Vec<f64>) {
    let col = |p: &[f64], j: usize| p.iter().skip(j).step_by(dim).copied().collect::<Vec<_>>();
    let marginals: Vec<f64> = (0..dim).map(|j| bl1d::bl_exact_1d_tol(&col(a, j), &col(b, j), tol)).collect();
    let mut est = marginals.iter().copied().fold(0.0, f64::max);
    if dim > 1 {
        if let Some(f) = features {
            est = est.max(f.best_gap(a, b));
        }
        let (ma, mb) = (mean_rows(a, dim), mean_rows(b, dim));
        let diff: Vec<f64> = ma.iter().zip(&mb).map(|(x, y)| x - y).collect();
        let norm = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let u: Vec<f64> = diff.iter().map(|x| x / norm).collect();
            let pa: Vec<f64> = a.chunks(dim).map(|x| dot(&u, x)).collect();
            let pb: Vec<f64> = b.chunks(dim).map(|x| dot(&u, x)).collect();
            est = est.max(bl1d::bl_exact_1d_tol(&pa, &pb, tol));
        }
    }
    (est.min(2.0), marginals)
}

/// Canonical rows of both samples, swapped into a fixed order.
fn canonical_pair(a: &[f64], b: &[f64], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let (ca, cb) = (canonical_rows(a, dim), canonical_rows(b, dim));
    let swap = match ca.len().cmp(&cb.len()) {
        Ordering::Equal => cmp_rows(&ca, &cb) == Ordering::Greater,
        o => o == Ordering::Greater,
    };
    if swap {
        (cb, ca)
    } else {
        (ca, cb)
    }
}

struct Estimator {
    dim: usize,
    features: Option<RampFeatures>,
}

impl Estimator {
    fn eval(&self, a: &[f64], b: &[f64], tol: f64) -> (f64, Vec<f64>) {
        let (ca, cb) = canonical_pair(a, b, self.dim);
        nd_value(&ca, &cb, self.dim, self.features.as_ref(), tol)
    }
}

fn resample(points: &[f64], dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = points.len() / dim;
    let mut out = Vec::with_capacity(points.len());
    for _ in 0..n {
        let i = rng.gen_range(0..n);
        out.extend_from_slice(&points[i * dim..(i + 1) * dim]);
    }
    out
}

/// Percentile of a sorted sample by linear interpolation.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn report(l1: &EmpiricalLaw, l2: &EmpiricalLaw, est: &Estimator, method: DistanceMethod, opts: &ReportOptions) -> DistanceReport {
    let dim = l1.dim;
    let (estimate, marginals) = est.eval(&l1.points, &l2.points, bl1d::GOLDEN_TOL);
    let mut boots: Vec<f64> = (0..opts.bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut rng = SeedLineage::new(opts.seed, b, STREAM_STATS).rng();
            let r1 = resample(&l1.points, dim, &mut rng);
            let r2 = resample(&l2.points, dim, &mut rng);
            est.eval(&r1, &r2, RESAMPLE_TOL).0
        })
        .collect();
    boots.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - CI_LEVEL);
    let (ci_lo, ci_hi) = if boots.is_empty() { (estimate, estimate) } else { (percentile(&boots, tail), percentile(&boots, 1.0 - tail)) };
    let floor = |l: &EmpiricalLaw| {
        let (h1, h2) = l.halves();
        est.eval(&h1, &h2, bl1d::GOLDEN_TOL).0
    };
    let noise_floor = 0.5 * (floor(l1) + floor(l2));
    assert!(estimate <= 2.0, "bounded-Lipschitz distance {estimate} exceeds 2");
    DistanceReport {
        estimate,
        method,
        ci_lo,
        ci_hi,
        noise_floor,
        marginals,
        n1: l1.len(),
        n2: l2.len(),
        bootstrap: opts.bootstrap,
        seed: opts.seed,
    }
}

fn check_same_dim(l1: &EmpiricalLaw, l2: &EmpiricalLaw) -> Result<()> {
    if l1.dim != l2.dim {
        return Err(Error::DimensionMismatch { expected: l1.dim, got: l2.dim });
    }
    Ok(())
}

/// Exact distance between two laws on the line, with bootstrap CI and noise floor.
pub fn bl_distance_1d(l1: &EmpiricalLaw, l2: &EmpiricalLaw, opts: &ReportOptions) -> Result<DistanceReport> {
    check_same_dim(l1, l2)?;
    if l1.dim != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: l1.dim });
    }
    Ok(report(l1, l2, &Estimator { dim: 1, features: None }, DistanceMethod::Exact1d, opts))
}

/// Lower bound on the distance between two laws in `R^d`.
///
/// Ramp features are drawn from `opts.seed` and the pooled sample in canonical
/// order, so the result is exactly symmetric in its arguments.
pub fn bl_distance_nd(l1: &EmpiricalLaw, l2: &EmpiricalLaw, opts: &ReportOptions) -> Result<DistanceReport> {
    check_same_dim(l1, l2)?;
    if opts.feature_count < DEFAULT_FEATURES {
        return Err(Error::InvalidArgument(format!("feature_count {} < {DEFAULT_FEATURES}", opts.feature_count)));
    }
    let dim = l1.dim;
    let (ca, cb) = canonical_pair(&l1.points, &l2.points, dim);
    let pooled = [ca, cb].concat();
    let features = RampFeatures::generate(dim, opts.feature_count, opts.seed, &pooled);
    Ok(report(l1, l2, &Estimator { dim, features: Some(features) }, DistanceMethod::LowerBoundNd, opts))
}

/// Exact on the line, lower bound otherwise.
pub fn bl_distance(l1: &EmpiricalLaw, l2: &EmpiricalLaw, opts: &ReportOptions) -> Result<DistanceReport> {
    if l1.dim == 1 && l2.dim == 1 {
        bl_distance_1d(l1, l2, opts)
    } else {
        bl_distance_nd(l1, l2, opts)
    }
}

/// `sup_x |F_n(x) - cdf(x)|`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic critical value of the one-sample KS statistic at level `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-0.5 * (0.5 * alpha).ln()).sqrt() / (n as f64).sqrt()
}

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(n: usize, dim: usize, shift: f64, seed: u64) -> EmpiricalLaw {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n * dim).map(|i| rng.sample::<f64, _>(StandardNormal) + if i % dim == 0 { shift } else { 0.0 }).collect();
        EmpiricalLaw::new(dim, pts, 0.0, "test").unwrap()
    }

    fn quick() -> ReportOptions {
        ReportOptions { bootstrap: 20, ..ReportOptions::default() }
    }

    #[test]
    fn law_validation() {
        assert!(EmpiricalLaw::from_scalars(&[1.0]).is_err());
        assert!(EmpiricalLaw::from_scalars(&[1.0, f64::NAN]).is_err());
        assert!(EmpiricalLaw::new(2, vec![1.0, 2.0, 3.0], 0.0, "").is_err());
        let l = EmpiricalLaw::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(l.coordinate(1), vec![2.0, 4.0]);
        assert_eq!(l.mean(), vec![2.0, 3.0]);
    }

    #[test]
    fn point_masses_1d() {
        let a = EmpiricalLaw::from_scalars(&[0.0, 0.0]).unwrap();
        let b = EmpiricalLaw::from_scalars(&[2.0, 2.0]).unwrap();
        let r = bl_distance_1d(&a, &b, &quick()).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-8);
        assert_eq!(r.method, DistanceMethod::Exact1d);
        assert_eq!(r.noise_floor, 0.0);
    }

    #[test]
    fn nd_identical_and_shuffled() {
        let a = gauss(300, 2, 0.0, 1);
        let r = bl_distance_nd(&a, &a, &quick()).unwrap();
        assert_eq!(r.estimate, 0.0);
        let mut rows: Vec<Vec<f64>> = (0..a.len()).map(|i| a.row(i).to_vec()).collect();
        rows.reverse();
        rows.swap(3, 100);
        let b = EmpiricalLaw::from_rows(&rows).unwrap();
        assert_eq!(bl_distance_nd(&a, &b, &quick()).unwrap().estimate, 0.0);
    }

    #[test]
    fn nd_symmetry_and_shift_detection() {
        let a = gauss(4000, 2, 0.0, 2);
        let b = gauss(4000, 2, 1.0, 3);
        let opts = ReportOptions { bootstrap: 0, ..ReportOptions::default() };
        let r = bl_distance_nd(&a, &b, &opts).unwrap();
        let s = bl_distance_nd(&b, &a, &opts).unwrap();
        assert_eq!(r.estimate, s.estimate);
        assert_eq!(r.method, DistanceMethod::LowerBoundNd);
        assert!(r.estimate > 5.0 * r.noise_floor, "{} vs {}", r.estimate, r.noise_floor);
        assert!(r.estimate <= 2.0);
        let bad = ReportOptions { feature_count: 8, ..opts };
        assert!(bl_distance_nd(&a, &b, &bad).is_err());
    }

    #[test]
    fn bootstrap_interval_brackets_a_clear_gap() {
        let a = gauss(500, 1, 0.0, 4);
        let b = gauss(500, 1, 0.8, 5);
        let r = bl_distance_1d(&a, &b, &quick()).unwrap();
        assert!(r.ci_lo <= r.ci_hi);
        assert!(r.ci_lo > 0.0);
    }

    #[test]
    fn ks_against_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..4000).map(|_| -0.5 * (1.0 - rng.gen::<f64>()).ln()).collect();
        let d = ks_statistic(&xs, |x| 1.0 - (-2.0 * x).exp());
        assert!(d < ks_critical(4000, 0.01));
        assert!((ks_critical(4000, 0.01) - 1.6276 / 4000f64.sqrt()).abs() < 1e-4);
        let (m, se) = mean_se(&xs);
        assert!((m - 0.5).abs() < 4.0 * se);
    }

    #[test]
    fn percentile_interpolates() {
        assert_eq!(percentile(&[0.0, 1.0, 2.0], 0.25), 0.5);
        assert_eq!(percentile(&[3.0], 0.9), 3.0);
    }
}
