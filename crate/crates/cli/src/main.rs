use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use revivals_cli::config::{parse_values, Propagator, RawConfig, SweepAxis};
use revivals_cli::experiment::preflight;
use revivals_cli::{load, name_for, output, presets, run_to_dir, sweep_to_dir, CliError};

#[derive(Parser)]
#[command(name = "revivals", version, about = "Collapse and revival experiments for damped anharmonic oscillators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a config over a list of values of one parameter
    Sweep {
        config: PathBuf,
        /// gamma, b or state_n (defaults to the config's sweep)
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated values
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
        #[arg(long)]
        parallel: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a figure preset; without a name, list them
    Preset {
        name: Option<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check a config without running it
    Validate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

/// Flags that override config fields.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    omega0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_im: Option<f64>,
    #[arg(long)]
    state_n: Option<usize>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    n_thermal: Option<f64>,
    #[arg(long)]
    full_equation: Option<bool>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    record_every: Option<usize>,
    /// Comma-separated observables for the plot script
    #[arg(long, value_delimiter = ',')]
    outputs: Option<Vec<String>>,
    #[arg(long, value_parser = parse_propagator)]
    propagator: Option<Propagator>,
}

fn parse_propagator(s: &str) -> Result<Propagator, String> {
    match s {
        "rk4" => Ok(Propagator::Rk4),
        "exact" => Ok(Propagator::Exact),
        _ => Err(format!("unknown propagator {s:?}; expected rk4 or exact")),
    }
}

impl From<Overrides> for RawConfig {
    fn from(o: Overrides) -> Self {
        RawConfig {
            dim: o.dim,
            omega0: o.omega0,
            alpha_re: o.alpha_re,
            alpha_im: o.alpha_im,
            state_n: o.state_n,
            k: o.k,
            b: o.b,
            gamma: o.gamma,
            n_thermal: o.n_thermal,
            full_equation: o.full_equation,
            t_final: o.t_final,
            dt: o.dt,
            record_every: o.record_every,
            outputs: o.outputs,
            propagator: o.propagator,
            ..Default::default()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let dir = output::out_dir();
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = load(Some(&config), overrides.into())?;
            let (art, analysis) = run_to_dir(&cfg, &name_for(&config), &dir)?;
            report_run(&art.csv, analysis.as_ref().map(|a| a.classification.as_str()));
        }
        Command::Sweep { config, axis, values, parallel, overrides } => {
            let cfg = load(Some(&config), overrides.into())?;
            let spec = cfg.sweep.clone();
            let axis = match (axis, &spec) {
                (Some(a), _) => a.parse::<SweepAxis>()?,
                (None, Some(s)) => s.axis,
                (None, None) => return Err(CliError::Config("--axis is required".to_string())),
            };
            let values = match (values, &spec) {
                (Some(v), _) => parse_values(&v)?,
                (None, Some(s)) => s.values.clone(),
                (None, None) => return Err(CliError::Config("--values is required".to_string())),
            };
            let parallel = parallel.or(spec.and_then(|s| s.parallel)).unwrap_or(1);
            let name = format!("{}_sweep_{axis}", name_for(&config));
            let (art, rows) = sweep_to_dir(&cfg, axis, &values, parallel, &name, &dir)?;
            report_sweep(&art.csv, &rows);
        }
        Command::Preset { name: None, .. } => {
            for name in presets::names() {
                let raw = presets::raw(name)?;
                println!("{name:6} {}", raw.comment.unwrap_or_default());
            }
        }
        Command::Preset { name: Some(name), overrides } => {
            presets::text(&name)?;
            let seed = RawConfig { seed_preset: Some(name.clone()), ..Default::default() };
            let raw = presets::raw(&name)?;
            let cfg =
                RawConfig { comment: raw.comment, sweep: raw.sweep, ..seed }.overlay(overrides.into()).resolve()?;
            match cfg.sweep.clone() {
                Some(s) => {
                    let (art, rows) = sweep_to_dir(&cfg, s.axis, &s.values, s.parallel.unwrap_or(1), &name, &dir)?;
                    report_sweep(&art.csv, &rows);
                }
                None => {
                    let (art, analysis) = run_to_dir(&cfg, &name, &dir)?;
                    report_run(&art.csv, analysis.as_ref().map(|a| a.classification.as_str()));
                }
            }
        }
        Command::Validate { config, overrides } => {
            let cfg = load(Some(&config), overrides.into())?;
            preflight(&cfg)?;
            println!("{}: ok", config.display());
        }
    }
    Ok(())
}

fn report_run(csv: &std::path::Path, classification: Option<&str>) {
    println!("wrote {} ({})", csv.display(), classification.unwrap_or("analysis unavailable"));
}

fn report_sweep(csv: &std::path::Path, rows: &[revivals_cli::sweep::SweepRow]) {
    for row in rows {
        if let Some(msg) = &row.error_message {
            eprintln!("point {} failed: {msg}", row.value);
        }
    }
    println!("wrote {} ({} points)", csv.display(), rows.len());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
