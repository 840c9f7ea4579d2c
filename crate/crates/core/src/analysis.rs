//! Collapse/revival structure of ⟨a(t)⟩ traces: envelopes, revival peaks,
//! pattern classification, first-revival amplitudes and nonlinearity scans.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::fock::{density_from_pure, displaced_number_state, FockSpace};
use crate::hamiltonian::{
    build_hamiltonian, default_n0, timescales_closed_form, DiagonalHamiltonian, Timescales, DEFAULT_OMEGA0,
};
use crate::lindblad::{build_liouvillian, phase_evolve, rk4_evolve, DampingSpec, EvolveOptions, Trajectory};

/// Minimum number of samples per classical period for [`extract_envelope`].
pub const MIN_SAMPLES_PER_PERIOD: f64 = 20.0;

/// Upper envelope of |⟨a(t)⟩|.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub window: f64,
    /// |⟨a⟩| at the first sample.
    pub initial: f64,
}

impl Envelope {
    /// Uses the samples themselves as envelope nodes. Appropriate when the
    /// trace has no fast carrier (e.g. |⟨a⟩| sampled on a uniform grid).
    pub fn from_samples(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
        }
        if times.len() < 3 {
            return Err(Error::InsufficientSampling(format!("{} samples", times.len())));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("sample times must be strictly increasing");
        }
        let window = times[1] - times[0];
        let initial = values[0];
        Ok(Self { times, values, window, initial })
    }

    pub fn span(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0) - self.times.first().copied().unwrap_or(0.0)
    }

    /// Linear interpolation between nodes, clamped at the ends.
    pub fn value_at(&self, t: f64) -> f64 {
        let (ts, vs) = (&self.times, &self.values);
        if t <= ts[0] {
            return vs[0];
        }
        let last = ts.len() - 1;
        if t >= ts[last] {
            return vs[last];
        }
        let i = ts.partition_point(|&x| x <= t);
        let (t0, t1) = (ts[i - 1], ts[i]);
        vs[i - 1] + (vs[i] - vs[i - 1]) * (t - t0) / (t1 - t0)
    }
}

/// Per-window maximum of |⟨a⟩|, placed at the time where it occurs.
///
/// Requires at least [`MIN_SAMPLES_PER_PERIOD`] samples per `t_cl`; the
/// window is normally `t_cl` itself.
pub fn extract_envelope(traj: &Trajectory<f64>, window: f64, t_cl: f64) -> Result<Envelope> {
    envelope_from_series(&traj.times(), &traj.abs_a(), window, t_cl)
}

/// [`extract_envelope`] on bare, uniformly spaced samples of |⟨a⟩|.
pub fn envelope_from_series(times: &[f64], abs_a: &[f64], window: f64, t_cl: f64) -> Result<Envelope> {
    if times.len() != abs_a.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: abs_a.len() });
    }
    if times.len() < 3 {
        return Err(Error::InsufficientSampling(format!("{} records", times.len())));
    }
    if !(window > 0.0) || !(t_cl > 0.0) {
        return domain("window and classical period must be positive");
    }
    let last = times.len() - 1;
    let spacing = (times[last] - times[0]) / last as f64;
    let per_period = t_cl / spacing;
    if per_period < MIN_SAMPLES_PER_PERIOD {
        return Err(Error::InsufficientSampling(format!(
            "{per_period:.1} samples per classical period, need {MIN_SAMPLES_PER_PERIOD}"
        )));
    }
    let t0 = times[0];
    let mut out_t = Vec::new();
    let mut out_v = Vec::new();
    let mut current: Option<(usize, f64, f64)> = None;
    for (&t, &v) in times.iter().zip(abs_a) {
        let bin = ((t - t0) / window).floor() as usize;
        match current {
            Some((b, _, bv)) if b == bin => {
                if v > bv {
                    current = Some((b, t, v));
                }
            }
            Some((_, bt, bv)) => {
                out_t.push(bt);
                out_v.push(bv);
                current = Some((bin, t, v));
            }
            None => current = Some((bin, t, v)),
        }
    }
    if let Some((_, bt, bv)) = current {
        out_t.push(bt);
        out_v.push(bv);
    }
    Ok(Envelope { times: out_t, values: out_v, window, initial: abs_a[0] })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    NoCollapse,
    RegularRevivals,
    DampedRevivals,
    Irregular,
    NoRevivals,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::NoCollapse => "NO_COLLAPSE",
            Classification::RegularRevivals => "REGULAR_REVIVALS",
            Classification::DampedRevivals => "DAMPED_REVIVALS",
            Classification::Irregular => "IRREGULAR",
            Classification::NoRevivals => "NO_REVIVALS",
        }
    }

    /// Strength of the revival pattern along a damping series:
    /// regular > damped > none. `None` for the other classes.
    pub fn revival_strength(&self) -> Option<u8> {
        match self {
            Classification::RegularRevivals => Some(2),
            Classification::DampedRevivals => Some(1),
            Classification::NoRevivals => Some(0),
            _ => None,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "NO_COLLAPSE" => Classification::NoCollapse,
            "REGULAR_REVIVALS" => Classification::RegularRevivals,
            "DAMPED_REVIVALS" => Classification::DampedRevivals,
            "IRREGULAR" => Classification::Irregular,
            "NO_REVIVALS" => Classification::NoRevivals,
            other => return domain(format!("unknown classification {other:?}")),
        })
    }
}

/// Detection thresholds, as fractions of the initial amplitude unless noted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    /// Envelope below this fraction counts as collapsed.
    pub collapse_fraction: f64,
    /// A revival peak must exceed this fraction (no damping).
    pub revival_fraction: f64,
    /// Same, when the run is dissipative.
    pub damped_revival_fraction: f64,
    /// A collapse must last at least this many classical periods.
    pub min_collapse_periods: f64,
    /// Coefficient of variation of peak spacings at or above which the pattern is irregular.
    pub max_spacing_cv: f64,
    /// Minimum peak separation as a fraction of the predicted revival time.
    pub min_separation_fraction: f64,
}

impl Thresholds {
    /// Quadratic spectra revive fully, so revivals are held to half the
    /// initial amplitude. Cubic spectra never collapse below about half the
    /// initial amplitude between their fractional revivals, so both
    /// thresholds sit higher.
    pub fn for_order(k: u32) -> Self {
        if k >= 3 {
            Self {
                collapse_fraction: 0.5,
                revival_fraction: 0.9,
                damped_revival_fraction: 0.7,
                min_collapse_periods: 2.0,
                max_spacing_cv: 0.2,
                min_separation_fraction: 0.3,
            }
        } else {
            Self {
                collapse_fraction: 0.1,
                revival_fraction: 0.5,
                damped_revival_fraction: 0.01,
                min_collapse_periods: 2.0,
                max_spacing_cv: 0.2,
                min_separation_fraction: 0.3,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionOptions {
    pub thresholds: Thresholds,
    /// Use the damped revival threshold and report DAMPED instead of REGULAR.
    pub dissipative: bool,
    /// Reject envelopes shorter than the predicted revival time.
    pub require_full_span: bool,
}

impl DetectionOptions {
    pub fn for_order(k: u32, dissipative: bool) -> Self {
        Self { thresholds: Thresholds::for_order(k), dissipative, require_full_span: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RevivalReport {
    pub revival_times: Vec<f64>,
    pub revival_amplitudes: Vec<f64>,
    pub collapse_intervals: Vec<(f64, f64)>,
    pub classification: Classification,
    pub predicted: Option<Timescales<f64>>,
    pub initial_amplitude: f64,
}

/// Detects collapses and revivals using the predicted classical period and
/// revival time for scale.
pub fn detect_revivals(env: &Envelope, predicted: &Timescales<f64>, opts: &DetectionOptions) -> Result<RevivalReport> {
    if opts.require_full_span && env.span() < predicted.t_rev {
        return Err(Error::SpanTooShort(format!(
            "envelope spans {:.1} a.u., predicted revival time is {:.1} a.u.",
            env.span(),
            predicted.t_rev
        )));
    }
    let sep = opts.thresholds.min_separation_fraction * predicted.t_rev;
    let mut report = detect_with_scales(env, predicted.t_cl, sep, opts);
    report.predicted = Some(*predicted);
    Ok(report)
}

/// Core of [`detect_revivals`] with explicit scales, usable when no revival
/// time is defined (e.g. a harmonic spectrum).
pub fn detect_with_scales(env: &Envelope, t_cl: f64, min_separation: f64, opts: &DetectionOptions) -> RevivalReport {
    let th = &opts.thresholds;
    let a0 = env.initial;
    let (ts, vs) = (&env.times, &env.values);
    let n = vs.len();
    let mut report = RevivalReport {
        revival_times: Vec::new(),
        revival_amplitudes: Vec::new(),
        collapse_intervals: Vec::new(),
        classification: Classification::NoCollapse,
        predicted: None,
        initial_amplitude: a0,
    };
    if !(a0 > 0.0) || n < 3 {
        return report;
    }

    let thr = th.collapse_fraction * a0;
    let cross = |p: usize, q: usize| ts[p] + (thr - vs[p]) * (ts[q] - ts[p]) / (vs[q] - vs[p]);
    let mut i = 0;
    while i < n {
        if vs[i] < thr {
            let mut j = i;
            while j + 1 < n && vs[j + 1] < thr {
                j += 1;
            }
            let start = if i > 0 { cross(i - 1, i) } else { ts[i] };
            let end = if j + 1 < n { cross(j, j + 1) } else { ts[j] };
            if end - start >= th.min_collapse_periods * t_cl {
                report.collapse_intervals.push((start, end));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    let Some(&(first_start, _)) = report.collapse_intervals.first() else {
        return report;
    };

    let search_from = first_start + th.min_collapse_periods * t_cl;
    let fr = if opts.dissipative { th.damped_revival_fraction } else { th.revival_fraction };
    let mut candidates: Vec<usize> = (1..n - 1)
        .filter(|&i| vs[i] >= vs[i - 1] && vs[i] > vs[i + 1] && ts[i] > search_from && vs[i] > fr * a0)
        .collect();
    candidates.sort_by(|&a, &b| vs[b].total_cmp(&vs[a]).then(a.cmp(&b)));
    let mut accepted: Vec<usize> = Vec::new();
    for c in candidates {
        if accepted.iter().all(|&k| (ts[c] - ts[k]).abs() >= min_separation) {
            accepted.push(c);
        }
    }
    accepted.sort_unstable();
    if accepted.is_empty() {
        report.classification = Classification::NoRevivals;
        return report;
    }
    report.revival_times = accepted.iter().map(|&k| ts[k]).collect();
    report.revival_amplitudes = accepted.iter().map(|&k| vs[k]).collect();

    let mut prev = ts[0];
    let spacings: Vec<f64> = report
        .revival_times
        .iter()
        .map(|&t| {
            let d = t - prev;
            prev = t;
            d
        })
        .collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let var = spacings.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / spacings.len() as f64;
    let cv = var.sqrt() / mean;
    report.classification = if cv >= th.max_spacing_cv {
        Classification::Irregular
    } else if opts.dissipative {
        Classification::DampedRevivals
    } else {
        Classification::RegularRevivals
    };
    report
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperRevival {
    pub time: f64,
    /// `Re[s(t) s̄(0)] / |s(0)|²` with `s(t) = ⟨a(t)⟩ e^{iω₀t}`; 1 at a perfect return.
    pub score: f64,
}

/// Strongest return of ⟨a⟩ to its initial value after `search_from`.
///
/// Fractional revivals of a cubic spectrum restore |⟨a⟩| but with a phase
/// offset, so the comparison is made on the complex amplitude in the frame
/// rotating at ω₀.
pub fn detect_super_revival(traj: &Trajectory<f64>, omega0: f64, search_from: f64) -> Result<SuperRevival> {
    let recs = &traj.records;
    let s0 = recs.first().map(|r| r.a * Complex64::from_polar(1.0, omega0 * r.t)).unwrap_or_default();
    if s0.norm() == 0.0 {
        return domain("initial amplitude is zero; no super-revival to detect");
    }
    recs.iter()
        .filter(|r| r.t > search_from)
        .map(|r| {
            let s = r.a * Complex64::from_polar(1.0, omega0 * r.t);
            SuperRevival { time: r.t, score: (s * s0.conj()).re / s0.norm_sqr() }
        })
        .max_by(|x, y| x.score.total_cmp(&y.score))
        .ok_or_else(|| Error::SpanTooShort(format!("trajectory ends before t = {search_from}")))
}

/// Options for [`first_revival_amplitude_vs_n`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstRevivalOptions {
    /// Length of the non-dissipative run used to locate the first revival.
    pub search_time: f64,
    pub thresholds: Thresholds,
}

impl Default for FirstRevivalOptions {
    fn default() -> Self {
        Self { search_time: 320.0, thresholds: Thresholds::for_order(3) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstRevival {
    pub n: usize,
    pub time: f64,
    pub amplitude: f64,
    pub predicted_t_rev: f64,
}

/// Amplitude of |α, n⟩ at its first revival for each `n`.
///
/// The revival instant is found on the undamped evolution of the same state
/// (where revivals are sharp); the reported amplitude is the largest |⟨a⟩| of
/// the evolution under `damping` within half a classical period of that
/// instant.
pub fn first_revival_amplitude_vs_n(
    alpha: Complex64,
    n_values: &[usize],
    h: &DiagonalHamiltonian<f64>,
    damping: DampingSpec<f64>,
    opts: &FirstRevivalOptions,
) -> Result<Vec<FirstRevival>> {
    if h.order() != 3 {
        return domain("first-revival study is defined for the cubic nonlinearity");
    }
    n_values.par_iter().map(|&n| first_revival_for(alpha, n, h, damping, opts)).collect()
}

fn first_revival_for(
    alpha: Complex64,
    n: usize,
    h: &DiagonalHamiltonian<f64>,
    damping: DampingSpec<f64>,
    opts: &FirstRevivalOptions,
) -> Result<FirstRevival> {
    let (t_star, ts) = locate_first_revival(alpha, n, h, opts)?;
    let t_cl = ts.t_cl;
    let rho0 = density_from_pure(&displaced_number_state(h.space(), alpha, n)?);
    let l = build_liouvillian(h, damping);
    let traj = if damping.is_dissipative() {
        rk4_evolve(&l, &rho0, t_star + t_cl, EvolveOptions::default(), &mut [])?
    } else {
        phase_evolve(&l, &rho0, t_star + t_cl, t_cl / 40.0)?
    };
    let amplitude =
        traj.records.iter().filter(|r| (r.t - t_star).abs() <= t_cl / 2.0).map(|r| r.a.norm()).fold(0.0, f64::max);
    Ok(FirstRevival { n, time: t_star, amplitude, predicted_t_rev: ts.t_rev })
}

/// First revival instant of |α, n⟩ under `h` without dissipation, searched
/// over `opts.search_time`, together with the predicted time scales.
pub fn locate_first_revival(
    alpha: Complex64,
    n: usize,
    h: &DiagonalHamiltonian<f64>,
    opts: &FirstRevivalOptions,
) -> Result<(f64, Timescales<f64>)> {
    let rho0 = density_from_pure(&displaced_number_state(h.space(), alpha, n)?);
    let ts = timescales_closed_form(h, default_n0(alpha, n))?;
    let undamped = build_liouvillian(h, DampingSpec::none());
    let reference = phase_evolve(&undamped, &rho0, opts.search_time, ts.t_cl / 40.0)?;
    let env = extract_envelope(&reference, ts.t_cl, ts.t_cl)?;
    let det = DetectionOptions { thresholds: opts.thresholds, dissipative: false, require_full_span: true };
    let report = detect_revivals(&env, &ts, &det)?;
    let t_star = *report
        .revival_times
        .first()
        .ok_or_else(|| Error::SpanTooShort(format!("no revival of n = {n} within {} a.u.", opts.search_time)))?;
    Ok((t_star, ts))
}

/// Fixed parameters of a nonlinearity scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanParams {
    pub dim: usize,
    pub omega0: f64,
    pub alpha: Complex64,
    pub state_n: usize,
    pub order: u32,
    pub gamma: f64,
    /// Observation window.
    pub t_obs: f64,
    /// Sampling interval of |⟨a⟩|.
    pub sample_dt: f64,
    pub thresholds: Thresholds,
}

impl ScanParams {
    /// Coherent state α = −1.9 in 30 levels, observed for 16000 a.u.
    /// (quadratic) or 3000 a.u. (cubic) at 0.5 a.u. resolution.
    pub fn standard(order: u32) -> Self {
        Self {
            dim: 30,
            omega0: DEFAULT_OMEGA0,
            alpha: Complex64::new(-1.9, 0.0),
            state_n: 0,
            order,
            gamma: 0.0,
            t_obs: if order >= 3 { 3000.0 } else { 16000.0 },
            sample_dt: 0.5,
            thresholds: Thresholds::for_order(order),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanPoint {
    pub b: f64,
    pub classification: Classification,
    pub revival_times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    /// Sorted by increasing `b`.
    pub points: Vec<ScanPoint>,
    /// Smallest `b` with regular revivals after a genuine collapse.
    pub b_onset: Option<f64>,
    /// Smallest `b` above the onset whose pattern is irregular.
    pub b_offset: Option<f64>,
}

/// Classifies the non-dissipative dynamics at each `b`.
pub fn scan_nonlinearity(b_values: &[f64], params: &ScanParams) -> Result<ScanResult> {
    if params.gamma != 0.0 {
        return domain("nonlinearity scans are defined without dissipation (γ = 0)");
    }
    if b_values.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return domain("scan values must be positive and finite");
    }
    let space = FockSpace::new(params.dim)?;
    let rho0 = density_from_pure(&displaced_number_state(space, params.alpha, params.state_n)?);
    let n0 = default_n0(params.alpha, params.state_n);
    let mut bs = b_values.to_vec();
    bs.sort_by(f64::total_cmp);

    let points = bs
        .par_iter()
        .map(|&b| {
            let h = build_hamiltonian(space, params.omega0, b, params.order)?;
            let ts = timescales_closed_form(&h, n0)?;
            let l = build_liouvillian(&h, DampingSpec::none());
            let traj = phase_evolve(&l, &rho0, params.t_obs, params.sample_dt)?;
            let env = Envelope::from_samples(traj.times(), traj.abs_a())?;
            let opts = DetectionOptions { thresholds: params.thresholds, dissipative: false, require_full_span: false };
            let sep = params.thresholds.min_separation_fraction * ts.t_rev;
            let report = detect_with_scales(&env, ts.t_cl, sep, &opts);
            Ok(ScanPoint { b, classification: report.classification, revival_times: report.revival_times })
        })
        .collect::<Result<Vec<_>>>()?;

    let b_onset = points.iter().find(|p| p.classification == Classification::RegularRevivals).map(|p| p.b);
    let b_offset = points
        .iter()
        .filter(|p| b_onset.map_or(true, |on| p.b > on))
        .find(|p| p.classification == Classification::Irregular)
        .map(|p| p.b);
    Ok(ScanResult { points, b_onset, b_offset })
}
