//! Acceptance suite on the bundled complex Ornstein-Uhlenbeck system.
//!
//! Each criterion returns a [`CriterionOutcome`] with a pass flag, a one-line
//! summary and the numbers behind it. CSV artifacts produced on the way are
//! attached so callers can write them to disk and compare reruns.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::averaging::{action_drift_of, average_field, average_function, averaged_diffusion, ActionVector, AveragingMethod, HermitianMatrix};
use crate::coupling::{build_coupled, delta_segment_action_gap, occupation_profile, CouplingConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::{orthogonality_residual, HamiltonianSpec};
use crate::model::{complex_vec, system_from_strs, ComplexVec, ConfigFile, DriftVariant, FieldExpr, Monomial, Poly, SystemSpec};
use crate::rng::derive_seed;
use crate::sde::{ito_refinement, simulate_action_sde, simulate_cutoff_effective, simulate_effective, Record, RunParams};
use crate::stats::{bl_distance_nd, convergence_table, ks_critical, ks_statistic, mean_se, write_convergence_csv, ConvergenceConfig, EmpiricalLaw, ReportOptions};

pub const ACCEPTANCE_TOML: &str = include_str!("../assets/acceptance.toml");

/// Quadrature grid used when comparing against the symbolic backend.
const CHECK_GRID: usize = 16;

pub fn acceptance_config() -> ConfigFile {
    ConfigFile::from_toml_str(ACCEPTANCE_TOML).expect("bundled config parses")
}

/// Sizes shared by the stochastic criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcceptanceOptions {
    pub seed: u64,
    pub n_paths: usize,
    pub bootstrap: usize,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        let run = acceptance_config().run;
        Self { seed: run.seed.unwrap_or(0), n_paths: run.n_paths.unwrap_or(4000), bootstrap: crate::stats::DEFAULT_BOOTSTRAP }
    }
}

impl AcceptanceOptions {
    fn report(&self, tag: u64) -> ReportOptions {
        ReportOptions { bootstrap: self.bootstrap, ..ReportOptions::default() }.with_seed(derive_seed(self.seed, tag))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub summary: String,
    pub metrics: BTreeMap<String, f64>,
    /// `(file name, contents)` of CSV artifacts.
    #[serde(skip)]
    pub artifacts: Vec<(String, String)>,
}

impl CriterionOutcome {
    fn new(id: u32, name: &str, pass: bool, summary: String) -> Self {
        Self { id, name: name.into(), pass, summary, metrics: BTreeMap::new(), artifacts: Vec::new() }
    }

    fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.into(), value);
        self
    }

    pub fn line(&self) -> String {
        format!("criterion {:>2} {}: {} ({})", self.id, if self.pass { "PASS" } else { "FAIL" }, self.name, self.summary)
    }
}

/// The bundled system, its start point and run section.
pub struct AcceptanceSystem {
    pub spec: SystemSpec,
    pub config: ConfigFile,
    pub v0: ComplexVec,
}

pub fn acceptance_system() -> Result<AcceptanceSystem> {
    let config = acceptance_config();
    let spec = config.system()?;
    let v0 = complex_vec(config.run.v0.as_ref().ok_or_else(|| Error::Config("acceptance config lacks v0".into()))?)?;
    Ok(AcceptanceSystem { spec, config, v0 })
}

fn rand_complex(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * scale
}

/// Random polynomial with up to `max_terms` monomials of total degree at most `max_degree`.
pub fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_degree: u32, max_terms: usize) -> Poly {
    let terms = rng.gen_range(1..=max_terms);
    let monomials = (0..terms).map(|_| {
        let deg = rng.gen_range(0..=max_degree);
        let (mut alpha, mut beta) = (vec![0u32; n], vec![0u32; n]);
        for _ in 0..deg {
            let k = rng.gen_range(0..n);
            if rng.gen::<bool>() {
                alpha[k] += 1;
            } else {
                beta[k] += 1;
            }
        }
        Monomial { coeff: rand_complex(rng, 1.0), alpha, beta }
    });
    Poly::from_monomials(n, monomials).expect("dimensions agree")
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> ComplexVec {
    ComplexVec::new((0..n).map(|_| rand_complex(rng, 0.5)).collect()).expect("finite")
}

fn max_gap(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// Constant dispersion `diag(1, 2)`: `A = diag(1, 4)` and `B = diag(1, 2)`.
pub fn criterion_1() -> Result<CriterionOutcome> {
    let spec = system_from_strs(&[1.0, 2f64.sqrt()], 0.1, &["-v1", "-v2"], None, &[&["1", "0"], &["0", "2"]])?;
    let want_a = HermitianMatrix::from_real_diagonal(&[1.0, 4.0]);
    let want_b = HermitianMatrix::from_real_diagonal(&[1.0, 2.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut sym, mut quad) = (0.0f64, 0.0f64);
    for _ in 0..8 {
        let a = random_point(&mut rng, 2);
        for (method, err) in [(AveragingMethod::Symbolic, &mut sym), (AveragingMethod::Quadrature { grid: 64 }, &mut quad)] {
            let m = averaged_diffusion(spec.psi(), &a, method)?;
            let root = m.principal_sqrt()?.root;
            *err = err.max(m.max_abs_diff(&want_a)).max(root.max_abs_diff(&want_b));
        }
    }
    let pass = sym <= 1e-12 && quad <= 1e-9;
    Ok(CriterionOutcome::new(1, "closed-form averaged diffusion", pass, format!("symbolic error {sym:.2e} <= 1e-12, quadrature error {quad:.2e} <= 1e-9"))
        .metric("symbolic_error", sym)
        .metric("quadrature_error", quad))
}

/// Symbolic and quadrature backends agree on random polynomial data.
pub fn criterion_2(seed: u64) -> Result<CriterionOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quad = AveragingMethod::Quadrature { grid: CHECK_GRID };
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(1..=3);
        let f = random_poly(&mut rng, n, 4, 4).to_expr();
        let p: Vec<FieldExpr> = (0..n).map(|_| random_poly(&mut rng, n, 4, 4).to_expr()).collect();
        let psi: Vec<Vec<FieldExpr>> = (0..n).map(|_| (0..n).map(|_| random_poly(&mut rng, n, 2, 3).to_expr()).collect()).collect();
        for _ in 0..8 {
            let a = random_point(&mut rng, n);
            let fs = average_function(&f, &a, AveragingMethod::Symbolic)?;
            let fq = average_function(&f, &a, quad)?;
            worst = worst.max((fs - fq).norm());
            worst = worst.max(max_gap(&average_field(&p, &a, AveragingMethod::Symbolic)?, &average_field(&p, &a, quad)?));
            let (ms, mq) = (averaged_diffusion(&psi, &a, AveragingMethod::Symbolic)?, averaged_diffusion(&psi, &a, quad)?);
            worst = worst.max(ms.max_abs_diff(&mq));
        }
    }
    Ok(CriterionOutcome::new(2, "symbolic vs quadrature averaging", worst <= 1e-9, format!("max backend gap {worst:.2e} <= 1e-9 over 50 systems x 8 points"))
        .metric("max_gap", worst))
}

/// Hamiltonian fields drop out of the averaged action drift.
pub fn criterion_3(sys: &AcceptanceSystem, seed: u64) -> Result<CriterionOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resid = 0.0f64;
    for _ in 0..64 {
        let n = rng.gen_range(1..=3);
        let p = random_poly(&mut rng, n, 4, 4);
        let h = HamiltonianSpec::new(p.add(&p.conj()).to_expr())?;
        let v = random_point(&mut rng, n);
        resid = resid.max(orthogonality_residual(&h, &v)?.into_iter().fold(0.0, |m, r| m.max(r.abs())));
    }
    let (full, modified) = (sys.spec.drift(DriftVariant::Full), sys.spec.drift(DriftVariant::Modified));
    let mut drift_gap = 0.0f64;
    for _ in 0..16 {
        let i = ActionVector::new((0..sys.spec.n()).map(|_| rng.gen_range(0.0..4.0)).collect())?;
        for method in [AveragingMethod::Symbolic, AveragingMethod::Quadrature { grid: CHECK_GRID }] {
            let a = action_drift_of(&full, sys.spec.psi(), &i, method)?;
            let b = action_drift_of(&modified, sys.spec.psi(), &i, method)?;
            drift_gap = a.iter().zip(&b).fold(drift_gap, |m, (x, y)| m.max((x - y).abs()));
        }
    }
    let pass = resid <= 1e-9 && drift_gap <= 1e-9;
    Ok(CriterionOutcome::new(3, "hamiltonian null contribution", pass, format!("orthogonality residual {resid:.2e}, action drift gap {drift_gap:.2e}, both <= 1e-9"))
        .metric("orthogonality_residual", resid)
        .metric("action_drift_gap", drift_gap))
}

/// Pathwise Itô action error shrinks like `sqrt(dtau)`.
pub fn criterion_4(sys: &AcceptanceSystem, seed: u64) -> Result<CriterionOutcome> {
    let spec = sys.spec.with_epsilon(0.1)?;
    let mut ratios = Vec::new();
    for s in 0..16 {
        let reports = ito_refinement(&spec, &sys.v0, 1.0, 0.01, 5, derive_seed(seed, s))?;
        ratios.extend(reports.windows(2).map(|w| w[0].sup_error / w[1].sup_error));
    }
    ratios.sort_by(f64::total_cmp);
    let median = crate::stats::percentile(&ratios, 0.5);
    let pass = (1.2..=1.7).contains(&median);
    Ok(CriterionOutcome::new(4, "Ito action consistency", pass, format!("median error ratio per halving {median:.3} in [1.2, 1.7] over {} ratios", ratios.len()))
        .metric("median_ratio", median))
}

fn conv_rows_csv(rows: &[crate::stats::ConvergenceRow]) -> String {
    let mut buf = Vec::new();
    write_convergence_csv(rows, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf8")
}

/// Action-law distance to the effective equation shrinks with `eps`.
pub fn criterion_5(sys: &AcceptanceSystem, opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let eps = sys.config.run.eps_list.clone().unwrap_or_else(|| vec![0.2, 0.05, 0.0125]);
    let mut cfg = ConvergenceConfig::new(eps, 1.0, opts.n_paths, vec![1.0], derive_seed(opts.seed, 5));
    cfg.report = opts.report(5);
    let rows = convergence_table(&sys.spec, &sys.v0, &cfg)?;
    let est: Vec<f64> = rows.iter().map(|r| r.report.estimate).collect();
    let (first, last) = (&rows[0].report, &rows[rows.len() - 1].report);
    let strict = est.windows(2).all(|w| w[1] < w[0]);
    // an increase between neighbours must stay inside the earlier bootstrap interval
    let decreasing = rows.windows(2).all(|w| w[1].report.estimate <= w[0].report.ci_hi);
    let separated = first.ci_lo > last.ci_hi;
    let below = last.estimate < 2.0 * last.noise_floor;
    let mut out = CriterionOutcome::new(
        5,
        "eps convergence of action laws",
        decreasing && separated && below,
        format!(
            "distances {} (point estimates strictly decreasing: {strict}, decreasing within CI: {decreasing}); CI first [{:.4}, {:.4}] vs last [{:.4}, {:.4}] (separated: {separated}); last {:.4} < 2 x floor {:.4}: {below}",
            est.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>().join(" > "),
            first.ci_lo,
            first.ci_hi,
            last.ci_lo,
            last.ci_hi,
            last.estimate,
            last.noise_floor
        ),
    );
    for r in &rows {
        out = out.metric(&format!("distance_eps_{}", r.eps), r.report.estimate);
    }
    out.artifacts.push(("convergence.csv".into(), conv_rows_csv(&rows)));
    Ok(out.metric("noise_floor_last", last.noise_floor))
}

/// Uniform-in-time closeness at the smallest `eps`.
pub fn criterion_6(sys: &AcceptanceSystem, opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let eps = sys.config.run.eps_list.as_ref().and_then(|e| e.last().copied()).unwrap_or(0.0125);
    let times = vec![1.0, 2.0, 4.0, 8.0];
    let mut cfg = ConvergenceConfig::new(vec![eps], 8.0, opts.n_paths, times, derive_seed(opts.seed, 6));
    cfg.report = opts.report(6);
    let rows = convergence_table(&sys.spec, &sys.v0, &cfg)?;
    let worst = rows.iter().map(|r| r.report.estimate / r.report.noise_floor).fold(0.0, f64::max);
    let max_est = rows.iter().map(|r| r.report.estimate).fold(0.0, f64::max);
    let mut out = CriterionOutcome::new(
        6,
        "uniform-in-time action closeness",
        worst < 3.0,
        format!(
            "max distance {max_est:.4}; largest distance / noise floor over times {{1,2,4,8}} = {worst:.2} < 3 ({})",
            rows.iter().map(|r| format!("t={}: {:.4}/{:.4}", r.time, r.report.estimate, r.report.noise_floor)).collect::<Vec<_>>().join(", ")
        ),
    );
    out.artifacts.push(("uniform_in_time.csv".into(), conv_rows_csv(&rows)));
    Ok(out.metric("max_ratio", worst).metric("max_distance", max_est))
}

/// Full and modified effective equations share action laws; the modified stationary marginal is Exp(1/2).
pub fn criterion_7(sys: &AcceptanceSystem, opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let times = vec![1.0, 4.0, 8.0];
    let run = |variant, tag| {
        let p = RunParams::new(8.0, 0.005, opts.n_paths, derive_seed(opts.seed, tag)).with_record(Record::Times(times.clone()));
        simulate_effective(&sys.spec, variant, &sys.v0, &p, AveragingMethod::Symbolic)
    };
    let (full, modified) = (run(DriftVariant::Full, 70)?, run(DriftVariant::Modified, 71)?);
    let mut ok = true;
    let mut parts = Vec::new();
    let mut out = CriterionOutcome::new(7, "full vs modified effective equations", true, String::new());
    for idx in 0..2 {
        let r = bl_distance_nd(&EmpiricalLaw::actions(&full, idx)?, &EmpiricalLaw::actions(&modified, idx)?, &opts.report(70 + idx as u64))?;
        ok &= r.estimate < 2.0 * r.noise_floor;
        parts.push(format!("t={}: {:.4} vs 2 x {:.4}", times[idx], r.estimate, r.noise_floor));
        out = out.metric(&format!("distance_t{}", times[idx]), r.estimate).metric(&format!("noise_floor_t{}", times[idx]), r.noise_floor);
    }
    let stationary = EmpiricalLaw::actions(&modified, 2)?;
    let crit = ks_critical(stationary.len(), 0.01);
    for k in 0..stationary.dim() {
        let xs = stationary.coordinate(k);
        let (m, se) = mean_se(&xs);
        let d = ks_statistic(&xs, |x| 1.0 - (-2.0 * x).exp());
        ok &= (m - 0.5).abs() <= 3.0 * se && d < crit;
        parts.push(format!("I{} mean {m:.4} (se {se:.4}), KS {d:.4} < {crit:.4}", k + 1));
        out = out.metric(&format!("mean_I{}", k + 1), m).metric(&format!("ks_I{}", k + 1), d);
    }
    out.pass = ok;
    out.summary = parts.join("; ");
    Ok(out)
}

/// Effective actions match the averaged action equation for constant dispersion.
pub fn criterion_8(sys: &AcceptanceSystem, opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let times = vec![0.5, 1.0];
    let dtau = 0.001;
    let p = RunParams::new(1.0, dtau, opts.n_paths, derive_seed(opts.seed, 80)).with_record(Record::Times(times.clone()));
    let eff = simulate_effective(&sys.spec, DriftVariant::Full, &sys.v0, &p, AveragingMethod::Symbolic)?;
    let p = RunParams { seed: derive_seed(opts.seed, 81), ..p };
    let act = simulate_action_sde(&sys.spec, &ActionVector::from_complex(&sys.v0), &p, AveragingMethod::Symbolic)?;
    let mut ok = sys.spec.has_constant_psi();
    let mut parts = Vec::new();
    let mut out = CriterionOutcome::new(8, "effective vs averaged action equation", true, String::new());
    for idx in 0..times.len() {
        let r = bl_distance_nd(&EmpiricalLaw::actions(&eff, idx)?, &EmpiricalLaw::actions(&act, idx)?, &opts.report(80 + idx as u64))?;
        ok &= r.estimate < 2.0 * r.noise_floor;
        parts.push(format!("t={}: {:.4} vs 2 x {:.4}", times[idx], r.estimate, r.noise_floor));
        out = out.metric(&format!("distance_t{}", times[idx]), r.estimate);
    }
    let clamps: usize = act.clamp_events.iter().sum();
    parts.push(format!("{clamps} clamp events"));
    out.pass = ok;
    out.summary = parts.join("; ");
    Ok(out.metric("clamp_events", clamps as f64))
}

fn cutoff_r(sys: &AcceptanceSystem) -> f64 {
    sys.config.run.r_cutoff.unwrap_or(64.0)
}

fn delta_list(sys: &AcceptanceSystem) -> Vec<f64> {
    sys.config.run.delta_list.clone().unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.025])
}

/// Time spent by an action below `delta` shrinks with `delta`.
pub fn criterion_9(sys: &AcceptanceSystem, opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let p = RunParams::new(4.0, 0.005, opts.n_paths, derive_seed(opts.seed, 90)).with_record(Record::All);
    let run = simulate_cutoff_effective(&sys.spec, DriftVariant::Full, &sys.v0, &p, AveragingMethod::Symbolic, cutoff_r(sys))?;
    let actions = run.ensemble.to_actions();
    let deltas = delta_list(sys);
    let prof = occupation_profile(&actions, &deltas, 0, Some(&run.cutoff.tau_r))?;
    let est: Vec<f64> = prof.iter().map(|p| p.estimate).collect();
    let decreasing = est.windows(2).all(|w| w[1] < w[0]);
    let halved = est[est.len() - 1] < 0.5 * est[0];
    let mut csv = String::from("delta,estimate,se\n");
    for p in &prof {
        csv.push_str(&format!("{},{},{}\n", p.delta, p.estimate, p.se));
    }
    let mut out = CriterionOutcome::new(
        9,
        "occupation time near the boundary",
        decreasing && halved,
        format!(
            "estimates {} (decreasing: {decreasing}); last < half of first: {halved}",
            prof.iter().map(|p| format!("{}:{:.4}", p.delta, p.estimate)).collect::<Vec<_>>().join(", ")
        ),
    );
    out.artifacts.push(("occupation.csv".into(), csv));
    for p in &prof {
        out = out.metric(&format!("occupation_delta_{}", p.delta), p.estimate);
    }
    Ok(out)
}

/// Delta segments copy actions bit for bit and the schedule tiles the horizon.
pub fn criterion_10(sys: &AcceptanceSystem, opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let deltas = delta_list(sys);
    let mut ok = true;
    let mut parts = Vec::new();
    let mut out = CriterionOutcome::new(10, "coupling exactness", true, String::new());
    for (i, &delta) in deltas.iter().take(2).enumerate() {
        let cfg = CouplingConfig {
            t_end: 2.0,
            dtau: 0.01,
            delta,
            r: cutoff_r(sys),
            n_paths: opts.n_paths,
            seed: derive_seed(opts.seed, 100 + i as u64),
            method: AveragingMethod::Symbolic,
        };
        let run = build_coupled(&sys.spec, &sys.v0, &cfg)?;
        let gap = delta_segment_action_gap(&run);
        let tiles = run.schedule.tiles();
        let deltas_seen = run.rotations.entries.len();
        ok &= gap == 0.0 && tiles && deltas_seen > 0;
        parts.push(format!("delta={delta}: {deltas_seen} Delta segments, action gap {gap:e}, tiles {tiles}"));
        out = out.metric(&format!("delta_segments_{delta}"), deltas_seen as f64).metric(&format!("action_gap_{delta}"), gap);
        if i == 0 {
            let mut buf = Vec::new();
            run.schedule.write_csv(&mut buf).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            out.artifacts.push(("segments.csv".into(), String::from_utf8(buf).expect("utf8")));
        }
    }
    out.pass = ok;
    out.summary = parts.join("; ");
    Ok(out)
}

/// Reduced workload whose CSV outputs are compared across runs and thread counts.
pub fn determinism_workload(sys: &AcceptanceSystem, seed: u64) -> Result<Vec<(String, String)>> {
    let small = AcceptanceOptions { seed, n_paths: 256, bootstrap: 20 };
    let mut files = criterion_5(sys, &small)?.artifacts;
    files.extend(criterion_9(sys, &small)?.artifacts);
    files.extend(criterion_10(sys, &small)?.artifacts);
    Ok(files)
}

fn numeric_gap(a: &str, b: &str) -> Option<f64> {
    let (la, lb): (Vec<_>, Vec<_>) = (a.lines().collect(), b.lines().collect());
    if la.len() != lb.len() {
        return None;
    }
    let mut gap = 0.0f64;
    for (x, y) in la.iter().zip(&lb) {
        let (fx, fy): (Vec<_>, Vec<_>) = (x.split(',').collect(), y.split(',').collect());
        if fx.len() != fy.len() {
            return None;
        }
        for (u, v) in fx.iter().zip(&fy) {
            match (u.parse::<f64>(), v.parse::<f64>()) {
                (Ok(p), Ok(q)) => gap = gap.max((p - q).abs()),
                _ if u == v => {}
                _ => return None,
            }
        }
    }
    Some(gap)
}

/// Repeats the determinism workload on one thread and on `threads` threads.
pub fn criterion_11(sys: &AcceptanceSystem, opts: &AcceptanceOptions, threads: usize) -> Result<CriterionOutcome> {
    let pool = |t: usize| rayon::ThreadPoolBuilder::new().num_threads(t).build().map_err(|e| Error::InvalidArgument(e.to_string()));
    let seed = derive_seed(opts.seed, 110);
    let a = pool(1)?.install(|| determinism_workload(sys, seed))?;
    let b = pool(1)?.install(|| determinism_workload(sys, seed))?;
    let c = pool(threads.max(2))?.install(|| determinism_workload(sys, seed))?;
    let bitwise = a == b;
    let gap = a.iter().zip(&c).map(|((na, x), (nc, y))| if na == nc { numeric_gap(x, y) } else { None }).try_fold(0.0f64, |m, g| g.map(|g| m.max(g)));
    let parallel_ok = a.len() == c.len() && gap.is_some_and(|g| g <= 1e-12);
    Ok(CriterionOutcome::new(
        11,
        "determinism",
        bitwise && parallel_ok,
        format!(
            "{} CSV files; single-thread reruns bit-exact: {bitwise}; {}-thread max gap {}",
            a.len(),
            threads.max(2),
            gap.map_or("n/a".into(), |g| format!("{g:e}"))
        ),
    )
    .metric("parallel_gap", gap.unwrap_or(f64::INFINITY)))
}

/// Runs criterion `id`.
pub fn run_criterion(id: u32, sys: &AcceptanceSystem, opts: &AcceptanceOptions, threads: usize) -> Result<CriterionOutcome> {
    match id {
        1 => criterion_1(),
        2 => criterion_2(derive_seed(opts.seed, 2)),
        3 => criterion_3(sys, derive_seed(opts.seed, 3)),
        4 => criterion_4(sys, derive_seed(opts.seed, 4)),
        5 => criterion_5(sys, opts),
        6 => criterion_6(sys, opts),
        7 => criterion_7(sys, opts),
        8 => criterion_8(sys, opts),
        9 => criterion_9(sys, opts),
        10 => criterion_10(sys, opts),
        11 => criterion_11(sys, opts, threads),
        _ => Err(Error::InvalidArgument(format!("no acceptance criterion {id}"))),
    }
}

pub const CRITERIA: [u32; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];
