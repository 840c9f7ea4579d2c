//! One-parameter sweeps over gamma, b or state_n.

use rayon::prelude::*;

use crate::config::{check_sweep_values, ExperimentConfig, SweepAxis};
use crate::experiment::{analyze, run_experiment, Analysis};
use crate::CliError;

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub value: f64,
    /// Failure kind (`config`, `truncation`, ...) when the point failed.
    pub result: Result<Analysis, String>,
    pub error_message: Option<String>,
}

fn point(base: &ExperimentConfig, axis: SweepAxis, value: f64) -> Result<Analysis, CliError> {
    let cfg = base.with_axis(axis, value);
    cfg.check()?;
    let run = run_experiment(&cfg)?;
    analyze(&cfg, &run.times(), &run.abs_a())
}

/// Runs every value on at most `parallel` workers. Rows come back sorted by
/// value, so the summary does not depend on input order or worker count.
pub fn run_sweep(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    parallel: usize,
) -> Result<Vec<SweepRow>, CliError> {
    check_sweep_values(axis, values)?;
    if parallel == 0 {
        return Err(CliError::Config("parallel must be at least 1".to_string()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        sorted
            .par_iter()
            .map(|&value| match point(base, axis, value) {
                Ok(a) => SweepRow { value, result: Ok(a), error_message: None },
                Err(e) => SweepRow { value, result: Err(e.kind().to_string()), error_message: Some(e.to_string()) },
            })
            .collect()
    });
    Ok(rows)
}
