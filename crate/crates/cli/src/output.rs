//! CSV, manifest and plot-script artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use revivals::ObservableRecord;

use crate::config::ExperimentConfig;
use crate::experiment::Analysis;
use crate::sweep::SweepRow;
use crate::CliError;

pub const CSV_HEADER: &str = "t,re_a,im_a,abs_a,n_expect,trace,purity";
pub const SWEEP_HEADER: &str =
    "param_value,classification,n_revivals,first_revival_t,first_revival_amp,predicted_t_rev,predicted_t_sr";
pub const OUT_DIR_ENV: &str = "REVIVALS_OUT_DIR";

/// `$REVIVALS_OUT_DIR`, or `./out`.
pub fn out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn trajectory_csv(records: &[ObservableRecord]) -> String {
    let mut s = String::with_capacity(records.len() * 170 + 64);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            num(r.t),
            num(r.a.re),
            num(r.a.im),
            num(r.a.norm()),
            num(r.n_expect),
            num(r.trace),
            num(r.purity)
        );
    }
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for row in rows {
        let line = match &row.result {
            Ok(a) => format!(
                "{},{},{},{},{},{},{}",
                row.value,
                a.classification,
                a.revival_times.len(),
                opt(a.first_revival_t),
                opt(a.first_revival_amp),
                opt(a.predicted_t_rev),
                opt(a.predicted_t_sr)
            ),
            Err(kind) => format!("{},ERROR:{kind},,,,,", row.value),
        };
        s.push_str(&line);
        s.push('\n');
    }
    s
}

/// Column index (1-based) of an observable in the trajectory CSV.
fn column(name: &str) -> usize {
    CSV_HEADER.split(',').position(|c| c == name).map(|i| i + 1).expect("validated observable")
}

pub fn trajectory_plot(name: &str, cfg: &ExperimentConfig) -> String {
    let curves: Vec<String> =
        cfg.outputs.iter().map(|o| format!("'{name}.csv' using 1:{} with lines title '{o}'", column(o))).collect();
    format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 1000,600\n\
         set output '{name}.png'\n\
         set xlabel 't (a.u.)'\n\
         set title '{name}: k = {}, b = {}, gamma = {}, n = {}'\n\
         plot {}\n",
        cfg.k,
        cfg.b,
        cfg.gamma,
        cfg.state_n,
        curves.join(", \\\n     ")
    )
}

pub fn sweep_plot(name: &str, axis: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 1000,600\n\
         set output '{name}.png'\n\
         set xlabel '{axis}'\n\
         set ylabel 'first revival |<a>|'\n\
         plot '{name}.csv' every ::1 using 1:5 with linespoints title 'first revival amplitude'\n"
    )
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub name: &'a str,
    pub library_version: &'a str,
    pub timestamp: u64,
    pub wall_time_s: f64,
    pub config: &'a ExperimentConfig,
    pub dt: Option<f64>,
    pub records: Option<usize>,
    pub csv: String,
    pub plot_script: String,
    pub analysis: Option<&'a Analysis>,
    pub analysis_error: Option<String>,
    pub sweep_axis: Option<&'a str>,
    pub sweep_failures: Option<usize>,
}

pub fn unix_time() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn write(dir: &Path, file: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(file);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_manifest(dir: &Path, m: &Manifest) -> Result<PathBuf, CliError> {
    let text = serde_json::to_string_pretty(m).expect("manifest serializes");
    write(dir, &format!("{}.manifest.json", m.name), &(text + "\n"))
}
