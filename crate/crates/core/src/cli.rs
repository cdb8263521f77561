//! Command-line driver: `run`, `sweep` and `spectrum`.
//!
//! Exit codes: 0 on success, 1 on I/O failure, 2 on configuration errors and
//! 3 on numerical failures. Files written before a failure are removed.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{interface_profile, sweep_crossovers};
use crate::config::{digest_text, ConfigError, RunConfig, Sources, SweepConfig};
use crate::ensemble::{run_ensemble, run_spectrum, run_sweep, EnsembleSpec, SpectrumSpec};
use crate::error::Error;
use crate::output::{self, OutputSet, PointManifest, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const RECIPROCAL_WARNING: &str =
    "directionality is nonzero: level statistics can only be utilized in the reciprocal regime";

#[derive(Debug, Parser)]
#[command(name = "chiral-array", version, about = "Single-excitation dynamics of chiral emitter arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ensemble time series of every configured observable.
    Run(Common),
    /// Readout summaries over a parameter grid.
    Sweep(Common),
    /// Complex spectra and gap-ratio statistics.
    Spectrum(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// System configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Sweep file, layered over `--config`.
    #[arg(long, value_name = "PATH")]
    sweep: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; 0 uses every available core.
    #[arg(long, value_name = "N", default_value_t = 0)]
    workers: usize,
    #[arg(long, value_name = "N")]
    realizations: Option<usize>,
    /// Overrides one configuration value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Config(ConfigError),
    Numerical(Error),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Config(_) => EXIT_CONFIG,
            Self::Numerical(Error::InvalidConfig(_) | Error::EmptyZone | Error::InvalidGrid(_)) => EXIT_CONFIG,
            Self::Numerical(_) => EXIT_NUMERICAL,
            Self::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) | Self::Io(m) => write!(f, "{m}"),
            Self::Config(e) => write!(f, "{e}"),
            Self::Numerical(e) => write!(f, "{} ({e})", e.tag()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Numerical(e)
    }
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (name, common) = match &cli.command {
        Command::Run(c) => ("run", c),
        Command::Sweep(c) => ("sweep", c),
        Command::Spectrum(c) => ("spectrum", c),
    };
    let mut outputs = None;
    let result = dispatch(name, common, &mut outputs);
    match result {
        Ok(warnings) => {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            EXIT_OK
        }
        Err(failure) => {
            if let Some(set) = outputs.as_mut() {
                OutputSet::remove_all(set);
            }
            eprintln!("error: {failure}");
            failure.code()
        }
    }
}

fn sources(name: &str, common: &Common) -> Result<Sources, Failure> {
    let mut src = Sources::new();
    if let Some(path) = &common.config {
        src.add_file(path)?;
    }
    match (&common.sweep, name) {
        (Some(path), "sweep") => src.add_file(path)?,
        (None, "sweep") => return Err(Failure::Usage("sweep requires --sweep PATH".into())),
        (Some(_), _) => return Err(Failure::Usage(format!("--sweep is only accepted by `sweep`, not `{name}`"))),
        (None, _) => {}
    }
    if common.config.is_none() && common.sweep.is_none() {
        return Err(Failure::Usage(format!("{name} requires --config PATH")));
    }
    if let Some(seed) = common.seed {
        src.add_override(&format!("ensemble.seed=\"{seed}\""))?;
    }
    if let Some(n) = common.realizations {
        let key = if name == "spectrum" { "spectrum.realizations" } else { "ensemble.realizations" };
        src.add_override(&format!("{key}={n}"))?;
    }
    for assignment in &common.set {
        src.add_override(assignment)?;
    }
    Ok(src)
}

fn manifest(command: &str, config: String, common: &Common, overrides: &[String]) -> RunManifest {
    RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config_digest: digest_text(&config),
        config,
        master_seed: 0,
        realizations: 0,
        grid: String::new(),
        workers: common.workers,
        overrides: overrides.to_vec(),
        started_unix_s: output::unix_now(),
        finished_unix_s: 0.0,
        wall_time_s: 0.0,
        outputs: Vec::new(),
        warnings: Vec::new(),
        points: Vec::new(),
    }
}

fn finish(mut m: RunManifest, outputs: &mut OutputSet) -> Result<Vec<String>, Failure> {
    let path = outputs.path("manifest.json");
    m.outputs = outputs.names();
    m.finished_unix_s = output::unix_now();
    m.wall_time_s = (m.finished_unix_s - m.started_unix_s).max(0.0);
    m.write(&path).map_err(io_error(&path))?;
    Ok(m.warnings)
}

fn dispatch(name: &str, common: &Common, outputs: &mut Option<OutputSet>) -> Result<Vec<String>, Failure> {
    let src = sources(name, common)?;
    let started = std::time::Instant::now();
    let warnings = match name {
        "run" => cmd_run(&src, common, outputs),
        "sweep" => cmd_sweep(&src, common, outputs),
        _ => cmd_spectrum(&src, common, outputs),
    }?;
    eprintln!("{name}: done in {:.2} s, outputs in {}", started.elapsed().as_secs_f64(), common.out.display());
    Ok(warnings)
}

fn open_outputs<'a>(common: &Common, outputs: &'a mut Option<OutputSet>) -> Result<&'a mut OutputSet, Failure> {
    let set = OutputSet::new(&common.out).map_err(io_error(&common.out))?;
    Ok(outputs.insert(set))
}

fn cmd_run(src: &Sources, common: &Common, outputs: &mut Option<OutputSet>) -> Result<Vec<String>, Failure> {
    let config = RunConfig::from_sources(src)?;
    let grid = config.grid.build()?;
    let spec = EnsembleSpec::new(
        config.system.clone(),
        config.initial.clone(),
        config.ensemble.realizations,
        config.ensemble.seed,
    )
    .with_observables(config.ensemble.observables.iter().copied())
    .with_grid(grid);
    let mut m = manifest("run", config.to_toml_string(), common, src.overrides());
    m.master_seed = config.ensemble.seed;
    m.realizations = config.ensemble.realizations;
    m.grid = config.grid.describe();

    let result = run_ensemble(&spec, common.workers)?;
    if result.fallback_realizations > 0 {
        m.warnings.push(format!(
            "{} of {} realizations used the matrix-exponential fallback",
            result.fallback_realizations, result.n_realizations
        ));
    }
    let set = open_outputs(common, outputs)?;
    for (kind, series) in &result.series {
        let path = set.path(&format!("{}.csv", kind.name()));
        output::write_series_csv(&path, series).map_err(io_error(&path))?;
    }
    let profile = interface_profile(&config.system, &result.mean_final_populations)?;
    let path = set.path("profile.csv");
    output::write_profile_csv(&path, &profile).map_err(io_error(&path))?;
    if config.system.n_clean > 0 {
        let path = set.path("interface.csv");
        output::write_interface_csv(&path, &profile).map_err(io_error(&path))?;
    }
    finish(m, set)
}

fn cmd_sweep(src: &Sources, common: &Common, outputs: &mut Option<OutputSet>) -> Result<Vec<String>, Failure> {
    let config = SweepConfig::from_sources(src)?;
    let spec = config.spec();
    let mut m = manifest("sweep", config.to_toml_string(), common, src.overrides());
    m.master_seed = spec.master_seed;
    m.realizations = spec.n_realizations;
    m.grid = format!("readout at gamma_t = {}", spec.readout_time);

    let table = run_sweep(&spec, common.workers)?;
    let crossovers = sweep_crossovers(&table);
    m.points = table
        .rows
        .iter()
        .map(|row| PointManifest {
            index: row.index,
            parameters: row.parameters.iter().map(|(p, v)| (p.name().to_string(), *v)).collect(),
            config_digest: row.config.as_ref().map(|system| {
                let mut point = config.run.clone();
                point.system = system.clone();
                point.digest()
            }),
            error: row.error.as_ref().map(|e| format!("{}: {e}", e.tag())),
        })
        .collect();
    let failures = table.failures();
    if failures > 0 {
        m.warnings.push(format!("{failures} of {} sweep points failed", table.rows.len()));
    }
    let set = open_outputs(common, outputs)?;
    let path = set.path("sweep.csv");
    output::write_sweep_csv(&path, &table, &crossovers).map_err(io_error(&path))?;
    finish(m, set)
}

fn cmd_spectrum(src: &Sources, common: &Common, outputs: &mut Option<OutputSet>) -> Result<Vec<String>, Failure> {
    let config = RunConfig::from_sources(src)?;
    let mut spec = SpectrumSpec::new(config.system.clone(), config.spectrum.realizations, config.ensemble.seed);
    spec.weight_zone = config.spectrum.weight_zone.clone();
    spec.weight_threshold = config.spectrum.weight_threshold;
    let mut m = manifest("spectrum", config.to_toml_string(), common, src.overrides());
    m.master_seed = spec.master_seed;
    m.realizations = spec.n_realizations;
    m.grid = "none".into();
    if config.system.directionality != 0.0 {
        m.warnings.push(RECIPROCAL_WARNING.into());
    }

    let result = run_spectrum(&spec, common.workers)?;
    if let Err(e) = &result.statistics {
        m.warnings.push(format!("gap statistics unavailable: {}", e.tag()));
    }
    let set = open_outputs(common, outputs)?;
    let path = set.path("spectrum.csv");
    output::write_spectrum_csv(&path, &result.records).map_err(io_error(&path))?;
    let path = set.path("gap_statistics.csv");
    output::write_gap_statistics_csv(&path, &result.statistics, result.records.len()).map_err(io_error(&path))?;
    finish(m, set)
}
