use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::Serialize;
use serde_json::json;

use stochavg::acceptance::{acceptance_config, acceptance_system, run_criterion, AcceptanceOptions, CRITERIA};
use stochavg::averaging::{action_diffusion, action_drift, average_field, averaged_diffusion, averaged_field_polys};
use stochavg::coupling::{build_coupled, delta_segment_action_gap, occupation_profile, CouplingConfig};
use stochavg::hamiltonian::orthogonality_residual;
use stochavg::model::{check_ellipticity, check_nonresonance, complex_vec, estimate_growth, to_polynomial, ConfigFile};
use stochavg::rng::{NoisePath, SeedLineage, STREAM_MAIN};
use stochavg::sde::{moment_diagnostic, simulate_action_sde, simulate_cutoff_effective, simulate_effective, simulate_perturbed, PathEnsemble, Record, RunParams};
use stochavg::stats::{convergence_table, mean_se, mixing_profile, write_convergence_csv, ConvergenceConfig, MixingConfig, ReportOptions};
use stochavg::{ActionVector, AveragingMethod, Complex64, ComplexVec, DriftVariant, HamiltonianSpec, SystemSpec};

use crate::{usage, AcceptanceArgs, Command};

pub enum Outcome {
    Ok,
    /// A check failed and `--strict` was given.
    Failed(String),
}

pub struct Context {
    pub config: Option<ConfigFile>,
    pub spec: Option<SystemSpec>,
    pub seed: u64,
    pub strict: bool,
    pub threads: Option<usize>,
    pub out: PathBuf,
}

impl Context {
    pub fn new(config_text: Option<&str>, seed: Option<u64>, strict: bool, threads: Option<usize>, out: &Path) -> Result<Self> {
        let config = config_text.map(ConfigFile::from_toml_str).transpose()?;
        let spec = config.as_ref().map(ConfigFile::system).transpose()?;
        let seed = seed
            .or_else(|| config.as_ref().and_then(|c| c.run.seed))
            .unwrap_or_else(|| if config.is_none() { AcceptanceOptions::default().seed } else { 0 });
        Ok(Self { config, spec, seed, strict, threads, out: out.to_path_buf() })
    }

    fn spec(&self) -> &SystemSpec {
        self.spec.as_ref().expect("config checked before dispatch")
    }

    fn cfg(&self) -> &ConfigFile {
        self.config.as_ref().expect("config checked before dispatch")
    }

    fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        fs::write(self.out.join(name), contents)?;
        Ok(())
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        self.write(name, serde_json::to_string_pretty(value)? + "\n")
    }

    fn vec_param(&self, name: &str, v: &Option<Vec<[f64; 2]>>) -> Result<ComplexVec> {
        let pairs = v.as_ref().ok_or_else(|| missing(name))?;
        let z = complex_vec(pairs)?;
        z.check_dim(self.spec().n())?;
        Ok(z)
    }

    fn variant(&self, default: &str) -> String {
        self.cfg().run.variant.clone().unwrap_or_else(|| default.into())
    }

    fn finish(&self, failures: Vec<String>) -> Outcome {
        if self.strict && !failures.is_empty() {
            Outcome::Failed(failures.join("; "))
        } else {
            Outcome::Ok
        }
    }
}

fn missing(name: &str) -> anyhow::Error {
    usage(format!("run.{name} is required"))
}

fn drift_variant(name: &str) -> Result<DriftVariant> {
    match name {
        "full" => Ok(DriftVariant::Full),
        "modified" => Ok(DriftVariant::Modified),
        other => Err(usage(format!("unknown variant `{other}` (expected full or modified)"))),
    }
}

fn report_options(ctx: &Context, tag: u64) -> ReportOptions {
    let mut r = ReportOptions::default().with_seed(stochavg::rng::derive_seed(ctx.seed, tag));
    if let Some(f) = ctx.cfg().run.feature_count {
        r.feature_count = f;
    }
    r
}

pub fn dispatch(command: &Command, ctx: &Context) -> Result<Outcome> {
    match command {
        Command::Check => check(ctx),
        Command::Average => average(ctx),
        Command::Simulate => simulate(ctx),
        Command::Compare => compare(ctx),
        Command::CoupleDemo => couple_demo(ctx),
        Command::Mixing => mixing(ctx),
        Command::Acceptance(a) => acceptance(ctx, a),
        Command::CheckHamiltonian => check_hamiltonian(ctx),
        Command::PlotData(_) => unreachable!("handled before dispatch"),
    }
}

fn check(ctx: &Context) -> Result<Outcome> {
    let spec = ctx.spec();
    let run = &ctx.cfg().run;
    let nonres = check_nonresonance(spec.freqs(), run.order_bound.unwrap_or(8), run.tol.unwrap_or(1e-9))?;
    let ellip = check_ellipticity(spec, run.samples.unwrap_or(256), ctx.seed)?;
    let growth = spec
        .drift(DriftVariant::Full)
        .iter()
        .enumerate()
        .map(|(k, e)| estimate_growth(e, spec.m0(), &[1.0, 2.0, 4.0, 8.0], stochavg::rng::derive_seed(ctx.seed, k as u64)))
        .collect::<stochavg::Result<Vec<_>>>()?;
    match &nonres.witness {
        Some(w) => println!("nonresonance: RESONANT, witness {w:?} (|<k,lambda>| = {:e})", nonres.min_abs),
        None => println!("nonresonance: ok up to order {} (min |<k,lambda>| = {:e})", nonres.order_bound, nonres.min_abs),
    }
    println!(
        "ellipticity: lambda_min = {:e}, lambda_max = {:e} over {} samples{}",
        ellip.lambda_lower,
        ellip.lambda_upper,
        ellip.sample_count,
        if ellip.pass { "" } else { " (degenerate)" }
    );
    for (k, g) in growth.iter().enumerate() {
        println!("growth P_{}: C_m0 >= {:.4} with m0 = {}", k + 1, g.c_m0_estimate, g.m0);
    }
    ctx.write_json("check.json", &json!({ "nonresonance": nonres, "ellipticity": ellip, "growth": growth, "psi_kind": spec.psi_kind() }))?;
    let mut failures = Vec::new();
    if nonres.resonant {
        failures.push(format!("frequencies are resonant, witness {:?}", nonres.witness.as_ref().expect("witness")));
    }
    if matches!(spec.psi_kind(), stochavg::PsiKind::Elliptic { .. }) && !ellip.pass {
        failures.push("dispersion declared elliptic but Psi Psi^* is degenerate".into());
    }
    Ok(ctx.finish(failures))
}

fn average(ctx: &Context) -> Result<Outcome> {
    let spec = ctx.spec();
    let variant = drift_variant(&ctx.variant("full"))?;
    let drift = spec.drift(variant);
    let symbolic = drift.iter().map(to_polynomial).collect::<stochavg::Result<Vec<_>>>().ok().map(|p| {
        averaged_field_polys(&p).iter().map(|q| q.pretty("a")).collect::<Vec<_>>()
    });
    match &symbolic {
        Some(lines) => {
            for (k, s) in lines.iter().enumerate() {
                println!("<<P>>_{}(a) = {s}", k + 1);
            }
        }
        None => println!("drift is not polynomial; no symbolic form"),
    }
    let mut doc = json!({ "variant": ctx.variant("full"), "symbolic": symbolic });
    if let Some(pt) = &ctx.cfg().run.point {
        let a = ctx.vec_param("point", &Some(pt.clone()))?;
        let method = AveragingMethod::for_integrator(spec);
        let field = average_field(&drift, &a, method)?;
        let diff = averaged_diffusion(spec.psi(), &a, method)?;
        let i = ActionVector::from_complex(&a);
        let f = action_drift(spec, &i, method)?;
        let k = action_diffusion(spec, &i, method)?;
        for (k, z) in field.iter().enumerate() {
            println!("<<P>>_{}(point) = {} {:+}i", k + 1, z.re, z.im);
        }
        doc["point"] = json!(pt);
        doc["field"] = json!(field.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
        doc["diffusion_eigenvalues"] = json!(diff.eigenvalues());
        doc["actions"] = json!(i.as_slice());
        doc["action_drift"] = json!(f);
        doc["action_diffusion"] = json!({ "k": k.k.real_rows(), "clamped": k.clamped });
        doc["method"] = serde_json::to_value(method)?;
    }
    ctx.write_json("average.json", &doc)?;
    Ok(Outcome::Ok)
}

fn run_params(ctx: &Context, t_end: f64, dtau: f64) -> Result<RunParams> {
    let run = &ctx.cfg().run;
    let p = RunParams::new(t_end, dtau, run.n_paths.unwrap_or(1000), ctx.seed);
    let record = match &run.times {
        Some(t) => Record::Times(t.clone()),
        None => Record::Stride((p.steps()? / 100).max(1)),
    };
    Ok(p.with_record(record))
}

fn mean_action_csv(ens: &PathEnsemble) -> String {
    let mut s = String::from("time,k,mean,se\n");
    for (idx, t) in ens.times().iter().enumerate() {
        let acts = ens.actions_at(idx);
        for k in 0..ens.dim() {
            let col: Vec<f64> = acts.iter().map(|r| r[k]).collect();
            let (m, se) = mean_se(&col);
            s.push_str(&format!("{t},{},{m},{se}\n", k + 1));
        }
    }
    s
}

fn write_ensemble(ctx: &Context, name: &str, ens: &PathEnsemble) -> Result<()> {
    let mut buf = Vec::new();
    ens.write_csv(&mut buf)?;
    ctx.write(name, buf)
}

fn simulate(ctx: &Context) -> Result<Outcome> {
    let spec = ctx.spec();
    let run = &ctx.cfg().run;
    let t_end = run.t_end.ok_or_else(|| missing("t_end"))?;
    let dtau = run.dtau.ok_or_else(|| missing("dtau"))?;
    let v0 = ctx.vec_param("v0", &run.v0)?;
    let p = run_params(ctx, t_end, dtau)?;
    let method = AveragingMethod::for_integrator(spec);
    let variant = ctx.variant("perturbed");
    let mut doc = json!({ "variant": variant, "params": p, "method": method });
    let ens = match variant.as_str() {
        "perturbed" => {
            let e = simulate_perturbed(spec, &v0, &p)?;
            write_ensemble(ctx, "interaction.csv", &e.a)?;
            e.v
        }
        "full" | "modified" => simulate_effective(spec, drift_variant(&variant)?, &v0, &p, method)?,
        "cutoff-full" | "cutoff-modified" => {
            let r = run.r_cutoff.ok_or_else(|| missing("r_cutoff"))?;
            let c = simulate_cutoff_effective(spec, drift_variant(&variant[7..])?, &v0, &p, method, r)?;
            doc["cutoff"] = serde_json::to_value(&c.cutoff)?;
            c.ensemble
        }
        "action" => simulate_action_sde(spec, &ActionVector::from_complex(&v0), &p, method)?,
        other => return Err(usage(format!("unknown simulate variant `{other}`"))),
    };
    if !ens.is_action() {
        doc["moments"] = serde_json::to_value(moment_diagnostic(&ens, spec.m0()))?;
    }
    write_ensemble(ctx, "ensemble.csv", &ens)?;
    ctx.write("mean_action.csv", mean_action_csv(&ens))?;
    ctx.write_json("simulate.json", &doc)?;
    println!("simulated {} paths of `{variant}` to tau = {t_end}", ens.n_paths());
    Ok(Outcome::Ok)
}

fn compare(ctx: &Context) -> Result<Outcome> {
    let spec = ctx.spec();
    let run = &ctx.cfg().run;
    let eps_list = run.eps_list.clone().ok_or_else(|| missing("eps_list"))?;
    let t_end = run.t_end.unwrap_or(1.0);
    let v0 = ctx.vec_param("v0", &run.v0)?;
    let times = run.times.clone().unwrap_or_else(|| vec![t_end]);
    let mut cfg = ConvergenceConfig::new(eps_list, t_end, run.n_paths.unwrap_or(1000), times.clone(), ctx.seed);
    cfg.method = AveragingMethod::for_integrator(spec);
    cfg.report = report_options(ctx, 1);
    let rows = convergence_table(spec, &v0, &cfg)?;
    let mut buf = Vec::new();
    write_convergence_csv(&rows, &mut buf)?;
    ctx.write("convergence.csv", buf)?;
    ctx.write_json("convergence.json", &rows)?;
    let mut failures = Vec::new();
    for &t in &times {
        let at: Vec<_> = rows.iter().filter(|r| r.time == t).collect();
        for r in &at {
            println!("eps = {:<8} tau = {t:<6} d_BL = {:.5} [{:.5}, {:.5}] floor {:.5}", r.eps, r.report.estimate, r.report.ci_lo, r.report.ci_hi, r.report.noise_floor);
        }
        let (first, last) = (at[0], at[at.len() - 1]);
        if at.len() > 1 && last.report.estimate >= first.report.estimate {
            failures.push(format!("distance at tau = {t} did not shrink from eps = {} to eps = {}", first.eps, last.eps));
        }
    }
    Ok(ctx.finish(failures))
}

fn couple_demo(ctx: &Context) -> Result<Outcome> {
    let spec = ctx.spec();
    let run = &ctx.cfg().run;
    let t_end = run.t_end.unwrap_or(2.0);
    let dtau = run.dtau.ok_or_else(|| missing("dtau"))?;
    let deltas = run.delta_list.clone().ok_or_else(|| missing("delta_list"))?;
    let r = run.r_cutoff.unwrap_or(64.0);
    let n_paths = run.n_paths.unwrap_or(1000);
    let v0 = ctx.vec_param("v0", &run.v0)?;
    let method = AveragingMethod::for_integrator(spec);
    let mut per_delta = Vec::new();
    let mut failures = Vec::new();
    for (i, &delta) in deltas.iter().enumerate() {
        let cfg = CouplingConfig { t_end, dtau, delta, r, n_paths, seed: ctx.seed, method };
        let cr = build_coupled(spec, &v0, &cfg)?;
        let gap = delta_segment_action_gap(&cr);
        let delta_segments: usize = cr.schedule.paths.iter().flatten().filter(|s| s.kind == stochavg::coupling::SegmentKind::Delta).count();
        println!("delta = {delta}: {delta_segments} Delta segments, action gap {gap:e}, tiles {}", cr.diagnostics.tiles);
        if gap != 0.0 || !cr.diagnostics.tiles {
            failures.push(format!("coupling at delta = {delta} broke the schedule or the action match"));
        }
        if i == 0 {
            let mut buf = Vec::new();
            cr.schedule.write_csv(&mut buf)?;
            ctx.write("segments.csv", buf)?;
            ctx.write_json("rotations.json", &cr.rotations)?;
        }
        per_delta.push(json!({ "delta": delta, "delta_segments": delta_segments, "action_gap": gap, "diagnostics": cr.diagnostics }));
    }
    let p = RunParams::new(t_end, dtau, n_paths, stochavg::rng::derive_seed(ctx.seed, 1)).with_record(Record::All);
    let cut = simulate_cutoff_effective(spec, DriftVariant::Full, &v0, &p, method, r)?;
    let prof = occupation_profile(&cut.ensemble.to_actions(), &deltas, 0, Some(&cut.cutoff.tau_r))?;
    let mut csv = String::from("delta,estimate,se\n");
    for o in &prof {
        csv.push_str(&format!("{},{},{}\n", o.delta, o.estimate, o.se));
        println!("occupation below delta = {}: {:.5} +- {:.5}", o.delta, o.estimate, o.se);
    }
    ctx.write("occupation.csv", csv)?;
    ctx.write_json("coupling.json", &json!({ "r_cutoff": r, "t_end": t_end, "dtau": dtau, "runs": per_delta, "occupation": prof }))?;
    Ok(ctx.finish(failures))
}

fn mixing(ctx: &Context) -> Result<Outcome> {
    let spec = ctx.spec();
    let run = &ctx.cfg().run;
    let v1 = ctx.vec_param("v1", &run.v1)?;
    let v2 = ctx.vec_param("v2", &run.v2)?;
    let times = run.times.clone().ok_or_else(|| missing("times"))?;
    let t_end = run.t_end.unwrap_or_else(|| times.iter().copied().fold(0.0, f64::max));
    let cfg = MixingConfig {
        t_end,
        dtau: run.dtau.ok_or_else(|| missing("dtau"))?,
        n_paths: run.n_paths.unwrap_or(1000),
        seed: ctx.seed,
        times: times.clone(),
        m_bound: v1.norm_sqr().sqrt().max(v2.norm_sqr().sqrt()),
        method: AveragingMethod::for_integrator(spec),
        report: report_options(ctx, 2),
    };
    let reports = mixing_profile(spec, drift_variant(&ctx.variant("full"))?, &v1, &v2, &cfg)?;
    let mut csv = String::from("time,estimate,ci_lo,ci_hi,noise_floor\n");
    for (t, d) in times.iter().zip(&reports) {
        csv.push_str(&format!("{t},{},{},{},{}\n", d.estimate, d.ci_lo, d.ci_hi, d.noise_floor));
        println!("tau = {t:<6} d_BL = {:.5} [{:.5}, {:.5}] floor {:.5}", d.estimate, d.ci_lo, d.ci_hi, d.noise_floor);
    }
    ctx.write("mixing.csv", csv)?;
    ctx.write_json("mixing.json", &json!({ "config": cfg, "reports": reports }))?;
    Ok(Outcome::Ok)
}

fn acceptance(ctx: &Context, args: &AcceptanceArgs) -> Result<Outcome> {
    let sys = acceptance_system()?;
    let defaults = AcceptanceOptions::default();
    let opts = AcceptanceOptions {
        seed: ctx.seed,
        n_paths: args.paths.unwrap_or(defaults.n_paths),
        bootstrap: args.bootstrap.unwrap_or(defaults.bootstrap),
    };
    let ids: Vec<u32> = if args.criteria.is_empty() { CRITERIA.to_vec() } else { args.criteria.clone() };
    if let Some(bad) = ids.iter().find(|i| !CRITERIA.contains(i)) {
        return Err(usage(format!("no criterion {bad}")));
    }
    let threads = ctx.threads.filter(|&t| t > 1).unwrap_or(4);
    let mut outcomes = Vec::new();
    let mut lines = String::new();
    for id in ids {
        let o = run_criterion(id, &sys, &opts, threads)?;
        println!("{}", o.line());
        lines.push_str(&o.line());
        lines.push('\n');
        for (name, contents) in &o.artifacts {
            ctx.write(&format!("c{id:02}_{name}"), contents)?;
        }
        outcomes.push(o);
    }
    ctx.write("acceptance.txt", &lines)?;
    ctx.write("acceptance.toml", stochavg::acceptance::ACCEPTANCE_TOML)?;
    ctx.write_json("acceptance.json", &json!({ "options": opts, "run": acceptance_config().run, "criteria": outcomes }))?;
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.pass).map(|o| format!("criterion {} failed", o.id)).collect();
    Ok(ctx.finish(failed))
}

fn check_hamiltonian(ctx: &Context) -> Result<Outcome> {
    let spec = ctx.spec();
    let h = spec.hamiltonian().ok_or_else(|| usage("config has no [hamiltonian] section"))?;
    let hs = HamiltonianSpec::new(h.clone())?;
    let n = spec.n();
    let samples = ctx.cfg().run.samples.unwrap_or(64);
    let degree = hs.poly()?.total_degree() as i32;
    let mut worst: f64 = 0.0;
    let mut worst_scaled: f64 = 0.0;
    for s in 0..samples {
        let mut noise = NoisePath::new(SeedLineage::new(ctx.seed, s, STREAM_MAIN), 1.0);
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        noise.next_complex(&mut z);
        let v = ComplexVec::new(z)?;
        let res = orthogonality_residual(&hs, &v)?;
        let m = res.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        worst = worst.max(m);
        worst_scaled = worst_scaled.max(m / (1.0 + v.norm_sqr().sqrt()).powi(degree));
    }
    let pass = worst_scaled <= 1e-10;
    println!("orthogonality residual: max {worst:e}, scaled {worst_scaled:e} over {samples} states ({})", if pass { "ok" } else { "FAIL" });
    ctx.write_json("hamiltonian.json", &json!({ "samples": samples, "max_residual": worst, "max_scaled_residual": worst_scaled, "pass": pass }))?;
    Ok(ctx.finish(if pass { vec![] } else { vec!["Hamiltonian field is not orthogonal to the actions".into()] }))
}

