//! Argument handling and the experiment driver.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use log::info;

use crate::analysis::{check, Bound, BoundReport, Verdict};
use crate::cli::config::parse_config_file;
use crate::cli::output::{regret_rows, write_bound_csv, write_couple_csv, write_regret_csv, CoupleRow, Manifest, ManifestRun, RegretRow};
use crate::cli::presets::{preset, Experiment, ExperimentPreset, PRESET_NAMES};
use crate::engine::{dominance_check, run_trials, TrialAggregate};
use crate::error::{ConfigError, Error};
use crate::principals::PrincipalKind;
use crate::strategies::StrategyKind;

#[derive(Debug, Parser)]
#[command(name = "strategic-bandits", version, about = "Simulate bandit principals against budget-limited strategic arms")]
pub struct Args {
    /// Built-in suite: fig1, fig2 or bounded.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub preset: Option<String>,
    /// TOML config file describing a single experiment.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Overrides the master seed of every experiment.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the trial count of every experiment.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Compare every applicable bound with the aggregates (bound_reports.csv).
    #[arg(long)]
    pub check_bounds: bool,
    /// With --check-bounds, exit 2 if a binding in-regime bound is violated.
    #[arg(long, requires = "check_bounds")]
    pub strict: bool,
    /// Coupled-pair mode `STRATEGY_A,STRATEGY_B,ARM` with a 1-based arm,
    /// e.g. `LSI,DeferredLump:5,1` (couple_report.csv).
    #[arg(long)]
    pub couple: Option<String>,
    /// Worker threads for the trial runner; defaults to all cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Assertion(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Library(#[from] Error),
}

impl CliError {
    /// 0 ok, 1 config error, 2 assertion failure, 3 I/O error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => 0,
            CliError::Usage(_) | CliError::Config(_) | CliError::Library(Error::Config(_)) => 1,
            CliError::Io { .. } | CliError::Library(Error::Io(_)) => 3,
            CliError::Assertion(_) | CliError::Library(_) => 2,
        }
    }
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// What a successful run wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
}

/// Parsed `--couple` argument.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupleSpec {
    pub strategy_a: StrategyKind,
    pub strategy_b: StrategyKind,
    /// 0-based.
    pub arm: usize,
}

impl std::str::FromStr for CoupleSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [a, b, arm] = parts.as_slice() else {
            return Err(ConfigError::Malformed(format!("--couple expects STRATEGY_A,STRATEGY_B,ARM, got `{s}`")));
        };
        let arm: usize = arm.parse().map_err(|_| ConfigError::Malformed(format!("--couple arm must be a positive integer, got `{arm}`")))?;
        if arm == 0 {
            return Err(ConfigError::Malformed("--couple arms are numbered from 1".into()));
        }
        Ok(CoupleSpec { strategy_a: a.parse()?, strategy_b: b.parse()?, arm: arm - 1 })
    }
}

fn load_experiments(args: &Args) -> Result<ExperimentPreset, CliError> {
    let seed = args.seed.unwrap_or(0);
    let mut suite = match (&args.preset, &args.config) {
        (Some(name), _) => preset(name, seed)
            .ok_or_else(|| ConfigError::Malformed(format!("unknown preset `{name}`; expected one of {}", PRESET_NAMES.join(", "))))?,
        (None, Some(path)) => {
            let config = parse_config_file(path).map_err(io_at(path))??;
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "config".into());
            let output = format!("{stem}_regret.csv");
            ExperimentPreset { name: stem.clone(), experiments: vec![Experiment { name: stem, output, config }], notes: vec![] }
        }
        (None, None) => return Err(ConfigError::MissingKey("--preset or --config".into()).into()),
    };
    suite.override_with(args.seed, args.trials);
    for e in &suite.experiments {
        e.config.validate()?;
    }
    Ok(suite)
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().map_err(|e| Error::Io(std::io::Error::other(e)))?;
            Ok(pool.install(f))
        }
    }
}

fn write_file(path: &Path, files: &mut Vec<PathBuf>, write: impl FnOnce(fs::File) -> std::io::Result<()>) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(io_at(path))?;
    write(file).map_err(io_at(path))?;
    files.push(path.to_path_buf());
    Ok(())
}

fn write_manifest(args: &Args, suite: &ExperimentPreset, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let source = match (&args.preset, &args.config) {
        (Some(name), _) => format!("preset {name}"),
        (None, Some(path)) => format!("config {}", path.display()),
        (None, None) => String::new(),
    };
    let manifest = Manifest {
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        source,
        notes: suite.notes.clone(),
        runs: suite.experiments.iter().map(|e| ManifestRun::new(&e.name, &e.output, &e.config)).collect(),
    };
    let path = args.out.join("manifest.toml");
    write_file(&path, files, |mut f| std::io::Write::write_all(&mut f, manifest.render().as_bytes()))
}

fn run_regret(args: &Args, suite: &ExperimentPreset, files: &mut Vec<PathBuf>) -> Result<Vec<String>, CliError> {
    let aggregates: Vec<TrialAggregate> = in_pool(args.workers, || {
        suite
            .experiments
            .iter()
            .map(|e| {
                info!("running {} ({})", e.name, e.config.principal);
                run_trials(&e.config)
            })
            .collect::<Result<Vec<_>, _>>()
    })??;

    for output in suite.outputs() {
        let rows: Vec<RegretRow> = suite
            .experiments
            .iter()
            .zip(&aggregates)
            .filter(|(e, _)| e.output == output)
            .flat_map(|(e, agg)| regret_rows(&e.name, &e.config, agg))
            .collect();
        write_file(&args.out.join(output), files, |f| write_regret_csv(f, &rows))?;
    }

    let mut failures = Vec::new();
    if args.check_bounds {
        let mut reports: Vec<(String, String, BoundReport)> = Vec::new();
        for (e, agg) in suite.experiments.iter().zip(&aggregates) {
            for bound in Bound::applicable(&e.config)? {
                let report = check(&e.config, agg, bound)?;
                if report.verdict() == Verdict::Violated && report.in_regime {
                    failures.push(format!("{} {}: {} arm {:?}", e.name, e.config.principal, report.bound_name, report.arm.map(|a| a + 1)));
                }
                reports.push((e.name.clone(), e.config.principal.name().to_string(), report));
            }
        }
        write_file(&args.out.join("bound_reports.csv"), files, |f| write_bound_csv(f, &reports))?;
    }
    Ok(if args.strict { failures } else { Vec::new() })
}

/// Only UCB carries a probability-one dominance guarantee, so only UCB
/// violations fail the run.
fn run_couple(args: &Args, spec: &CoupleSpec, suite: &ExperimentPreset, files: &mut Vec<PathBuf>) -> Result<Vec<String>, CliError> {
    let rows: Vec<CoupleRow> = in_pool(args.workers, || {
        suite
            .experiments
            .iter()
            .map(|e| {
                info!("coupling {} ({})", e.name, e.config.principal);
                let summary = dominance_check(&e.config, spec.arm, &spec.strategy_a, &spec.strategy_b)?;
                Ok(CoupleRow {
                    experiment: e.name.clone(),
                    principal: e.config.principal.name().to_string(),
                    arm: spec.arm,
                    strategy_a: spec.strategy_a.to_string(),
                    strategy_b: spec.strategy_b.to_string(),
                    summary,
                })
            })
            .collect::<Result<Vec<_>, Error>>()
    })??;
    write_file(&args.out.join("couple_report.csv"), files, |f| write_couple_csv(f, &rows))?;
    let failures = suite
        .experiments
        .iter()
        .zip(&rows)
        .filter(|(e, r)| e.config.principal == PrincipalKind::Ucb && r.summary.violations > 0)
        .map(|(e, r)| format!("{}: {} of {} coupled pairs favour {}", e.name, r.summary.violations, r.summary.pairs, r.strategy_b))
        .collect();
    Ok(failures)
}

/// Runs the command line `args` (program name first).
pub fn run_cli<I, T>(args: I) -> Result<RunReport, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(args)?;
    let couple: Option<CoupleSpec> = args.couple.as_deref().map(str::parse).transpose()?;
    let suite = load_experiments(&args)?;
    if let Some(spec) = &couple {
        for e in &suite.experiments {
            if spec.arm >= e.config.num_arms() {
                return Err(Error::ArmOutOfRange { arm: spec.arm, arms: e.config.num_arms() }.into());
            }
        }
    }
    fs::create_dir_all(&args.out).map_err(io_at(&args.out))?;

    let mut files = Vec::new();
    let failures = match &couple {
        Some(spec) => run_couple(&args, spec, &suite, &mut files)?,
        None => run_regret(&args, &suite, &mut files)?,
    };
    write_manifest(&args, &suite, &mut files)?;
    if !failures.is_empty() {
        return Err(CliError::Assertion(format!("{} assertion(s) failed:\n  {}", failures.len(), failures.join("\n  "))));
    }
    Ok(RunReport { files })
}
