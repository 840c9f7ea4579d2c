//! Experiment configuration: JSON documents, presets and flag overrides.
//!
//! Fields are merged as flags > file > seed preset > defaults, then resolved
//! into an [`ExperimentConfig`] with every value present.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::presets;
use crate::CliError;

/// CSV columns a plot script may draw.
pub const OBSERVABLES: [&str; 6] = ["re_a", "im_a", "abs_a", "n_expect", "trace", "purity"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagator {
    #[default]
    Rk4,
    /// Exact phase propagation; requires `gamma = 0`.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Gamma,
    B,
    StateN,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::Gamma => "gamma",
            SweepAxis::B => "b",
            SweepAxis::StateN => "state_n",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "gamma" => Ok(SweepAxis::Gamma),
            "b" => Ok(SweepAxis::B),
            "state_n" => Ok(SweepAxis::StateN),
            _ => Err(CliError::Config(format!("unknown sweep axis {s:?}; expected gamma, b or state_n"))),
        }
    }
}

/// Sweep stored alongside a config (used by presets).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel: Option<usize>,
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub omega0: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    /// 0 selects the coherent state.
    pub state_n: usize,
    /// Nonlinearity order: 1 linear, 2 Kerr, 3 cubic.
    pub k: u32,
    pub b: f64,
    pub gamma: f64,
    pub n_thermal: f64,
    pub full_equation: bool,
    pub t_final: f64,
    /// 0 picks the step automatically.
    pub dt: f64,
    pub record_every: usize,
    pub outputs: Vec<String>,
    pub seed_preset: Option<String>,
    pub propagator: Propagator,
    pub comment: Option<String>,
    pub sweep: Option<SweepSpec>,
}

/// Partially specified config as read from JSON or flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub dim: Option<usize>,
    pub omega0: Option<f64>,
    pub alpha_re: Option<f64>,
    pub alpha_im: Option<f64>,
    pub state_n: Option<usize>,
    pub k: Option<u32>,
    pub b: Option<f64>,
    pub gamma: Option<f64>,
    pub n_thermal: Option<f64>,
    pub full_equation: Option<bool>,
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
    pub record_every: Option<usize>,
    pub outputs: Option<Vec<String>>,
    pub seed_preset: Option<String>,
    pub propagator: Option<Propagator>,
    pub comment: Option<String>,
    pub sweep: Option<SweepSpec>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        RawConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl RawConfig {
    /// Fields set in `top` win over those in `self`.
    pub fn overlay(self, top: RawConfig) -> RawConfig {
        let base = self;
        overlay!(
            base,
            top,
            dim,
            omega0,
            alpha_re,
            alpha_im,
            state_n,
            k,
            b,
            gamma,
            n_thermal,
            full_equation,
            t_final,
            dt,
            record_every,
            outputs,
            seed_preset,
            propagator,
            comment,
            sweep
        )
    }

    pub fn from_json(text: &str) -> Result<RawConfig, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config JSON: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<RawConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Merges the seed preset (if any) and defaults underneath, then checks
    /// that every required field is present and every value is in range.
    pub fn resolve(self) -> Result<ExperimentConfig, CliError> {
        // comment and sweep describe the preset itself and are not inherited
        let merged = match &self.seed_preset {
            Some(name) => {
                let (comment, sweep) = (self.comment.clone(), self.sweep.clone());
                RawConfig { comment, sweep, ..presets::raw(name)?.overlay(self) }
            }
            None => self,
        };
        let mut missing = Vec::new();
        macro_rules! required {
            ($field:ident) => {
                merged.$field.unwrap_or_else(|| {
                    missing.push(stringify!($field));
                    Default::default()
                })
            };
        }
        let cfg = ExperimentConfig {
            dim: required!(dim),
            omega0: merged.omega0.unwrap_or(revivals::DEFAULT_OMEGA0),
            alpha_re: required!(alpha_re),
            alpha_im: merged.alpha_im.unwrap_or(0.0),
            state_n: merged.state_n.unwrap_or(0),
            k: required!(k),
            b: required!(b),
            gamma: required!(gamma),
            n_thermal: merged.n_thermal.unwrap_or(0.0),
            full_equation: merged.full_equation.unwrap_or(false),
            t_final: required!(t_final),
            dt: merged.dt.unwrap_or(0.0),
            record_every: merged.record_every.unwrap_or(1),
            outputs: merged.outputs.unwrap_or_else(|| vec!["re_a".to_string()]),
            seed_preset: merged.seed_preset,
            propagator: merged.propagator.unwrap_or_default(),
            comment: merged.comment,
            sweep: merged.sweep,
        };
        if !missing.is_empty() {
            return Err(CliError::Config(format!("missing required fields: {}", missing.join(", "))));
        }
        cfg.check()?;
        Ok(cfg)
    }
}

impl From<ExperimentConfig> for RawConfig {
    fn from(c: ExperimentConfig) -> Self {
        RawConfig {
            dim: Some(c.dim),
            omega0: Some(c.omega0),
            alpha_re: Some(c.alpha_re),
            alpha_im: Some(c.alpha_im),
            state_n: Some(c.state_n),
            k: Some(c.k),
            b: Some(c.b),
            gamma: Some(c.gamma),
            n_thermal: Some(c.n_thermal),
            full_equation: Some(c.full_equation),
            t_final: Some(c.t_final),
            dt: Some(c.dt),
            record_every: Some(c.record_every),
            outputs: Some(c.outputs),
            seed_preset: c.seed_preset,
            propagator: Some(c.propagator),
            comment: c.comment,
            sweep: c.sweep,
        }
    }
}

fn bad(msg: String) -> Result<(), CliError> {
    Err(CliError::Config(msg))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        RawConfig::from_json(text)?.resolve()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn alpha(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.alpha_re, self.alpha_im)
    }

    /// Range checks that need no simulation.
    pub fn check(&self) -> Result<(), CliError> {
        let finite = [
            ("omega0", self.omega0),
            ("alpha_re", self.alpha_re),
            ("alpha_im", self.alpha_im),
            ("b", self.b),
            ("gamma", self.gamma),
            ("n_thermal", self.n_thermal),
            ("t_final", self.t_final),
            ("dt", self.dt),
        ];
        if let Some((name, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return bad(format!("{name} must be finite, got {v}"));
        }
        if self.dim < 2 {
            return bad(format!("dim must be at least 2, got {}", self.dim));
        }
        if self.state_n >= self.dim {
            return bad(format!("state_n = {} does not fit in dim = {}", self.state_n, self.dim));
        }
        if !(1..=3).contains(&self.k) {
            return bad(format!("k must be 1, 2 or 3, got {}", self.k));
        }
        if self.omega0 <= 0.0 {
            return bad(format!("omega0 must be positive, got {}", self.omega0));
        }
        if self.b < 0.0 || self.gamma < 0.0 || self.n_thermal < 0.0 || self.dt < 0.0 {
            return bad("b, gamma, n_thermal and dt must be non-negative".to_string());
        }
        if self.t_final <= 0.0 {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".to_string());
        }
        if self.outputs.is_empty() {
            return bad("outputs must name at least one observable".to_string());
        }
        if let Some(o) = self.outputs.iter().find(|o| !OBSERVABLES.contains(&o.as_str())) {
            return bad(format!("unknown output {o:?}; expected one of {}", OBSERVABLES.join(", ")));
        }
        if self.propagator == Propagator::Exact && self.gamma > 0.0 {
            return bad("the exact propagator needs gamma = 0".to_string());
        }
        if let Some(s) = &self.sweep {
            check_sweep_values(s.axis, &s.values)?;
            if s.parallel == Some(0) {
                return bad("sweep.parallel must be at least 1".to_string());
            }
        }
        Ok(())
    }

    /// Copy with `axis` set to `value`.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> ExperimentConfig {
        let mut c = self.clone();
        match axis {
            SweepAxis::Gamma => c.gamma = value,
            SweepAxis::B => c.b = value,
            SweepAxis::StateN => c.state_n = value as usize,
        }
        c.sweep = None;
        c
    }
}

pub fn check_sweep_values(axis: SweepAxis, values: &[f64]) -> Result<(), CliError> {
    if values.is_empty() {
        return bad("sweep needs at least one value".to_string());
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return bad(format!("sweep value {v} is not finite"));
    }
    match axis {
        SweepAxis::StateN => {
            if let Some(v) = values.iter().find(|v| **v < 0.0 || v.fract() != 0.0) {
                return bad(format!("state_n values must be non-negative integers, got {v}"));
            }
        }
        _ => {
            if let Some(v) = values.iter().find(|v| **v < 0.0) {
                return bad(format!("{axis} values must be non-negative, got {v}"));
            }
        }
    }
    Ok(())
}

/// Parses `1e-4,2e-4, 5e-4`.
pub fn parse_values(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| CliError::Config(format!("bad sweep value {s:?}"))))
        .collect()
}
