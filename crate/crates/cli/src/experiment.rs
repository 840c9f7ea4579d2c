//! Running a single configured experiment and summarizing its revivals.

use serde::Serialize;

use revivals::analysis::{detect_revivals, detect_with_scales, envelope_from_series, locate_first_revival};
use revivals::{
    build_hamiltonian, build_liouvillian, default_n0, density_from_pure, displaced_number_state, phase_evolve,
    rk4_evolve, timescales_closed_form, DampingSpec, DetectionOptions, DiagonalHamiltonian, EvolveOptions,
    FirstRevivalOptions, FockSpace, ObservableRecord, Thresholds, Timescales,
};

use crate::config::{ExperimentConfig, Propagator};
use crate::CliError;

/// Observables of one run, already decimated to `record_every`.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<ObservableRecord>,
    /// Integration step (or sampling interval for the exact propagator).
    pub dt: f64,
}

impl RunOutput {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn abs_a(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.a.norm()).collect()
    }
}

pub fn hamiltonian(cfg: &ExperimentConfig) -> Result<DiagonalHamiltonian, CliError> {
    let space = FockSpace::new(cfg.dim)?;
    Ok(build_hamiltonian(space, cfg.omega0, cfg.b, cfg.k)?)
}

pub fn damping(cfg: &ExperimentConfig) -> Result<DampingSpec, CliError> {
    Ok(DampingSpec::new(cfg.gamma, cfg.n_thermal, cfg.full_equation)?)
}

/// Checks that need the physics objects: state truncation and step size.
pub fn preflight(cfg: &ExperimentConfig) -> Result<(), CliError> {
    cfg.check()?;
    let h = hamiltonian(cfg)?;
    displaced_number_state(h.space(), cfg.alpha(), cfg.state_n)?;
    let l = build_liouvillian(&h, damping(cfg)?);
    if cfg.propagator == Propagator::Rk4 && cfg.dt > 0.0 {
        let ratio = cfg.dt * l.omega_max();
        if ratio > revivals::lindblad::MAX_STEP_RATIO {
            return Err(CliError::Config(format!(
                "dt = {} gives dt·Ω_max = {ratio:.3} > {}; RK4 would be unstable",
                cfg.dt,
                revivals::lindblad::MAX_STEP_RATIO
            )));
        }
    }
    Ok(())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    preflight(cfg)?;
    let h = hamiltonian(cfg)?;
    let l = build_liouvillian(&h, damping(cfg)?);
    let rho0 = density_from_pure(&displaced_number_state(h.space(), cfg.alpha(), cfg.state_n)?);
    let dt = (cfg.dt > 0.0).then_some(cfg.dt);
    match cfg.propagator {
        Propagator::Rk4 => {
            let opts = EvolveOptions { dt, record_every: cfg.record_every, snapshot_every: None };
            let traj = rk4_evolve(&l, &rho0, cfg.t_final, opts, &mut [])?;
            Ok(RunOutput { records: traj.records, dt: traj.dt })
        }
        Propagator::Exact => {
            let n0 = default_n0(cfg.alpha(), cfg.state_n);
            let step = dt.unwrap_or_else(|| l.default_dt(h.classical_period(n0)));
            let traj = phase_evolve(&l, &rho0, cfg.t_final, step)?;
            let last = traj.records.len() - 1;
            let records = traj
                .records
                .into_iter()
                .enumerate()
                .filter(|(i, _)| i % cfg.record_every == 0 || *i == last)
                .map(|(_, r)| r)
                .collect();
            Ok(RunOutput { records, dt: step })
        }
    }
}

/// Revival summary of one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Analysis {
    pub classification: String,
    pub revival_times: Vec<f64>,
    pub revival_amplitudes: Vec<f64>,
    pub first_revival_t: Option<f64>,
    pub first_revival_amp: Option<f64>,
    pub predicted_t_cl: f64,
    pub predicted_t_rev: Option<f64>,
    pub predicted_t_sr: Option<f64>,
}

fn predicted(h: &DiagonalHamiltonian, cfg: &ExperimentConfig) -> Option<Timescales> {
    if cfg.k < 2 || cfg.b == 0.0 {
        return None;
    }
    timescales_closed_form(h, default_n0(cfg.alpha(), cfg.state_n)).ok()
}

/// Envelope analysis of |⟨a⟩| samples produced by `cfg`.
///
/// For damped runs with the cubic nonlinearity the first-revival columns use
/// the instant found on the undamped evolution of the same state and the
/// largest |⟨a⟩| of this run within half a classical period of it.
pub fn analyze(cfg: &ExperimentConfig, times: &[f64], abs_a: &[f64]) -> Result<Analysis, CliError> {
    let h = hamiltonian(cfg)?;
    let n0 = default_n0(cfg.alpha(), cfg.state_n);
    let dissipative = cfg.gamma > 0.0;
    let ts = predicted(&h, cfg);
    let t_cl = ts.map_or_else(|| h.classical_period(n0), |t| t.t_cl);
    let env = envelope_from_series(times, abs_a, t_cl, t_cl)?;
    let opts = DetectionOptions { require_full_span: false, ..DetectionOptions::for_order(cfg.k, dissipative) };
    let report = match &ts {
        Some(ts) => detect_revivals(&env, ts, &opts)?,
        None => {
            let sep = opts.thresholds.min_separation_fraction * cfg.t_final;
            detect_with_scales(&env, t_cl, sep, &opts)
        }
    };

    let mut first_t = report.revival_times.first().copied();
    let mut first_amp = report.revival_amplitudes.first().copied();
    if cfg.k == 3 && cfg.b > 0.0 && dissipative {
        let fro = FirstRevivalOptions { search_time: cfg.t_final, thresholds: Thresholds::for_order(3) };
        match locate_first_revival(cfg.alpha(), cfg.state_n, &h, &fro) {
            Ok((t_star, _)) => {
                first_t = Some(t_star);
                first_amp = times
                    .iter()
                    .zip(abs_a)
                    .filter(|(t, _)| (**t - t_star).abs() <= t_cl / 2.0)
                    .map(|(_, a)| *a)
                    .reduce(f64::max);
            }
            Err(revivals::Error::SpanTooShort(_)) => {
                first_t = None;
                first_amp = None;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Analysis {
        classification: report.classification.as_str().to_string(),
        revival_times: report.revival_times,
        revival_amplitudes: report.revival_amplitudes,
        first_revival_t: first_t,
        first_revival_amp: first_amp,
        predicted_t_cl: t_cl,
        predicted_t_rev: ts.map(|t| t.t_rev),
        predicted_t_sr: ts.and_then(|t| t.t_sr),
    })
}
