//! Batch front end for the `revivals` library: configs, presets, sweeps and
//! the artifacts they write.

pub mod config;
pub mod experiment;
pub mod output;
pub mod presets;
pub mod sweep;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use config::{ExperimentConfig, RawConfig, SweepAxis};
use experiment::{analyze, run_experiment, Analysis};
use output::Manifest;
use sweep::SweepRow;

#[derive(Clone, Debug, PartialEq)]
pub enum CliError {
    Config(String),
    Truncation(String),
    Stability(String),
    Io(String),
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Truncation(_) => 3,
            CliError::Stability(_) => 4,
            CliError::Io(_) | CliError::Analysis(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Truncation(_) => "truncation",
            CliError::Stability(_) => "stability",
            CliError::Io(_) => "io",
            CliError::Analysis(_) => "analysis",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Truncation(m)
            | CliError::Stability(m)
            | CliError::Io(m)
            | CliError::Analysis(m) => m,
        }
    }

    /// One JSON object per line, e.g.
    /// `{"error":"config","exit_code":2,"message":"..."}`.
    pub fn machine_line(&self) -> String {
        serde_json::json!({ "error": self.kind(), "exit_code": self.exit_code(), "message": self.message() })
            .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind(), self.message())
    }
}

impl std::error::Error for CliError {}

impl From<revivals::Error> for CliError {
    fn from(e: revivals::Error) -> Self {
        use revivals::Error as E;
        let msg = e.to_string();
        match e {
            E::Truncation(_) => CliError::Truncation(msg),
            E::Stability(_) | E::Overflow(_) => CliError::Stability(msg),
            E::InsufficientSampling(_) | E::SpanTooShort(_) => CliError::Analysis(msg),
            _ => CliError::Config(msg),
        }
    }
}

/// Paths of the files a command wrote.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub plot: PathBuf,
}

/// Output name for a config file: its stem.
pub fn name_for(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".to_string())
}

/// Loads a config file and applies flag overrides on top.
pub fn load(path: Option<&Path>, overrides: RawConfig) -> Result<ExperimentConfig, CliError> {
    let file = match path {
        Some(p) => RawConfig::from_file(p)?,
        None => RawConfig::default(),
    };
    file.overlay(overrides).resolve()
}

/// Runs one experiment and writes `<name>.csv`, `<name>.gp` and
/// `<name>.manifest.json` into `dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, name: &str, dir: &Path) -> Result<(Artifacts, Option<Analysis>), CliError> {
    let start = Instant::now();
    let run = run_experiment(cfg)?;
    let analysis = analyze(cfg, &run.times(), &run.abs_a());
    let wall = start.elapsed().as_secs_f64();
    let csv = output::write(dir, &format!("{name}.csv"), &output::trajectory_csv(&run.records))?;
    let plot = output::write(dir, &format!("{name}.gp"), &output::trajectory_plot(name, cfg))?;
    let (ok, err) = match analysis {
        Ok(a) => (Some(a), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let manifest = output::write_manifest(
        dir,
        &Manifest {
            name,
            library_version: env!("CARGO_PKG_VERSION"),
            timestamp: output::unix_time(),
            wall_time_s: wall,
            config: cfg,
            dt: Some(run.dt),
            records: Some(run.records.len()),
            csv: format!("{name}.csv"),
            plot_script: format!("{name}.gp"),
            analysis: ok.as_ref(),
            analysis_error: err,
            sweep_axis: None,
            sweep_failures: None,
        },
    )?;
    Ok((Artifacts { csv, manifest, plot }, ok))
}

/// Runs a sweep and writes `<name>.csv` (summary), `<name>.gp` and
/// `<name>.manifest.json` into `dir`.
pub fn sweep_to_dir(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    parallel: usize,
    name: &str,
    dir: &Path,
) -> Result<(Artifacts, Vec<SweepRow>), CliError> {
    let start = Instant::now();
    let rows = sweep::run_sweep(cfg, axis, values, parallel)?;
    let wall = start.elapsed().as_secs_f64();
    let csv = output::write(dir, &format!("{name}.csv"), &output::sweep_csv(&rows))?;
    let plot = output::write(dir, &format!("{name}.gp"), &output::sweep_plot(name, axis.as_str()))?;
    let failures = rows.iter().filter(|r| r.result.is_err()).count();
    let manifest = output::write_manifest(
        dir,
        &Manifest {
            name,
            library_version: env!("CARGO_PKG_VERSION"),
            timestamp: output::unix_time(),
            wall_time_s: wall,
            config: cfg,
            dt: None,
            records: None,
            csv: format!("{name}.csv"),
            plot_script: format!("{name}.gp"),
            analysis: None,
            analysis_error: None,
            sweep_axis: Some(axis.as_str()),
            sweep_failures: Some(failures),
        },
    )?;
    Ok((Artifacts { csv, manifest, plot }, rows))
}
