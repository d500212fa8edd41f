//! Experiment runner for the `stochavg` library.
//!
//! Every subcommand writes its artifacts, a `plot_data.csv` and a
//! `manifest.json` into the output directory. A manifest is enough to rerun
//! the command: `stochavg --from-manifest run/manifest.json --out rerun`.

mod commands;
mod manifest;
mod plot;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

pub use manifest::{Manifest, OutputEntry};
pub use plot::{emit_plot_data, PlotRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NON_FINITE: i32 = 3;
pub const EXIT_STRICT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "stochavg", version, about = "Stochastic averaging experiments")]
pub struct Cli {
    /// System configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Master seed; overrides `run.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Exit with status 4 when a check or criterion fails.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Rerun the command recorded in a manifest.
    #[arg(long, global = true)]
    pub from_manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Nonresonance, ellipticity and growth diagnostics.
    Check,
    /// Averaged drift, symbolically or at `run.point`.
    Average,
    /// Simulate one ensemble (`run.variant`: perturbed, full, modified, action, cutoff-full, cutoff-modified).
    Simulate,
    /// Action-law distances to the effective equation over `run.eps_list`.
    Compare,
    /// Coupled process, segment schedule and occupation times.
    CoupleDemo,
    /// Distance between effective ensembles started at `run.v1` and `run.v2`.
    Mixing,
    /// Run the acceptance criteria on the bundled system.
    Acceptance(AcceptanceArgs),
    /// Orthogonality of the averaged Hamiltonian field to the actions.
    CheckHamiltonian,
    /// Rebuild `plot_data.csv` from the artifacts of a run directory.
    PlotData(PlotDataArgs),
}

#[derive(Debug, Clone, Args)]
pub struct AcceptanceArgs {
    /// Comma-separated criterion ids; all by default.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u32>,
    /// Paths per ensemble.
    #[arg(long)]
    pub paths: Option<usize>,
    /// Bootstrap resamples.
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotDataArgs {
    /// Run directory to read.
    #[arg(long)]
    pub run: PathBuf,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Average => "average",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::CoupleDemo => "couple-demo",
            Command::Mixing => "mixing",
            Command::Acceptance(_) => "acceptance",
            Command::CheckHamiltonian => "check-hamiltonian",
            Command::PlotData(_) => "plot-data",
        }
    }
}

/// Bad input: malformed config, missing parameter, empty run directory.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// A check or criterion failed under `--strict`.
#[derive(Debug)]
pub struct StrictFailure(pub String);

impl std::fmt::Display for StrictFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "strict mode: {}", self.0)
    }
}

impl std::error::Error for StrictFailure {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Process exit status for an error.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_CONFIG;
    }
    if err.downcast_ref::<StrictFailure>().is_some() {
        return EXIT_STRICT;
    }
    if let Some(e) = err.downcast_ref::<stochavg::Error>() {
        use stochavg::Error as E;
        return match e {
            E::NonFinite { .. } => EXIT_NON_FINITE,
            E::NotPsd { .. } => EXIT_FAILURE,
            _ => EXIT_CONFIG,
        };
    }
    EXIT_FAILURE
}

/// Parses `args` (program name first), runs, prints errors and returns the exit status.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(cli, &args) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// Flags that the manifest replaces with its own values on a rerun.
const VOLATILE_FLAGS: [&str; 5] = ["--out", "--config", "--from-manifest", "--seed", "--threads"];

/// `args` without the program name and the volatile flags.
fn stable_args(args: &[OsString]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if VOLATILE_FLAGS.contains(&a.as_str()) {
            it.next();
        } else if !VOLATILE_FLAGS.iter().any(|f| a.starts_with(&format!("{f}="))) {
            out.push(a);
        }
    }
    out
}

pub fn run(cli: Cli, args: &[OsString]) -> Result<()> {
    if let Some(path) = &cli.from_manifest {
        return rerun_manifest(path, &cli.out);
    }
    let command = cli.command.clone().ok_or_else(|| usage("no subcommand given"))?;
    if let Command::PlotData(pd) = &command {
        if !pd.run.is_dir() {
            return Err(usage(format!("{} is not a directory", pd.run.display())));
        }
        fs::create_dir_all(&cli.out)?;
        let n = emit_plot_data(&pd.run, &cli.out)?;
        println!("wrote {n} rows to {}", cli.out.join(plot::PLOT_FILE).display());
        return Ok(());
    }
    let config_text = match (&cli.config, &command) {
        (Some(p), _) => Some(fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?),
        (None, Command::Acceptance(_)) => None,
        (None, _) => return Err(usage(format!("`{}` needs --config", command.name()))),
    };
    let ctx = commands::Context::new(config_text.as_deref(), cli.seed, cli.strict, cli.threads, &cli.out)?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build()?;
    let outcome = pool.install(|| commands::dispatch(&command, &ctx))?;
    plot::write_rows(&plot::collect_rows(&cli.out)?, &cli.out.join(plot::PLOT_FILE))?;
    let mut stable = stable_args(args);
    stable.extend(["--seed".into(), ctx.seed.to_string()]);
    let manifest = Manifest::new(command.name(), stable, ctx.seed, cli.threads, config_text, &cli.out)?;
    manifest.write(&cli.out.join(manifest::MANIFEST_FILE))?;
    match outcome {
        commands::Outcome::Ok => Ok(()),
        commands::Outcome::Failed(msg) => Err(StrictFailure(msg).into()),
    }
}

fn rerun_manifest(path: &Path, out: &Path) -> Result<()> {
    let m = Manifest::read(path).map_err(|e| usage(format!("cannot load manifest {}: {e:#}", path.display())))?;
    fs::create_dir_all(out)?;
    let mut args: Vec<OsString> = vec!["stochavg".into(), "--out".into(), out.as_os_str().to_owned()];
    if let Some(text) = &m.config_toml {
        let cfg = out.join("config.toml");
        fs::write(&cfg, text)?;
        args.extend(["--config".into(), cfg.into_os_string()]);
    }
    if let Some(t) = m.threads {
        args.extend(["--threads".into(), t.to_string().into()]);
    }
    args.extend(m.args.iter().map(OsString::from));
    let cli = Cli::try_parse_from(&args).map_err(|e| usage(format!("manifest arguments do not parse: {e}")))?;
    if cli.from_manifest.is_some() {
        return Err(usage("manifest refers to another manifest"));
    }
    run(cli, &args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn stable_args_drop_volatile_flags() {
        let a = os(&["stochavg", "--out", "x", "--config=c.toml", "--seed", "3", "--strict", "compare"]);
        assert_eq!(stable_args(&a), vec!["--strict", "compare"]);
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(exit_code(&usage("x")), EXIT_CONFIG);
        assert_eq!(exit_code(&StrictFailure("x".into()).into()), EXIT_STRICT);
        assert_eq!(exit_code(&stochavg::Error::NonFinite { path: 0, step: 1 }.into()), EXIT_NON_FINITE);
        assert_eq!(exit_code(&stochavg::Error::Config("bad".into()).into()), EXIT_CONFIG);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), EXIT_FAILURE);
    }

    #[test]
    fn subcommand_names_parse() {
        for name in ["check", "average", "simulate", "compare", "couple-demo", "mixing", "acceptance", "check-hamiltonian"] {
            let cli = Cli::try_parse_from(["stochavg", name]).unwrap();
            assert_eq!(cli.command.unwrap().name(), name);
        }
        let cli = Cli::try_parse_from(["stochavg", "acceptance", "--criteria", "1,3"]).unwrap();
        match cli.command {
            Some(Command::Acceptance(a)) => assert_eq!(a.criteria, vec![1, 3]),
            other => panic!("{other:?}"),
        }
    }
}
