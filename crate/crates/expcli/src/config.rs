//! Experiment configuration.
//!
//! A config is TOML with the sections `model`, `drive`, `numerics`, `sweep`,
//! `ringdown`, `teff`, `hysteresis` and `output` plus the top-level keys
//! `experiment` and `families`. Values are layered: shared defaults, then the
//! experiment's reference parameters, then the file, then `--override`
//! assignments. The merged table must deserialize without unknown keys and
//! pass [`ExperimentConfig::validate`].

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use gcl_core::model::{fq_to_f, f_to_fq, f2_to_g, g_to_f2};
use gcl_core::observables::{FitWeighting, TRUNCATION_GUARD};
use gcl_core::{DriveTone, Family, ModelParams};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;
use crate::presets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Ringdown,
    Populations,
    TeffScan,
    LinearResponse,
    ResponseMaxima,
    Bistability,
    Fluctuations,
    Parametric,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Ringdown,
        Experiment::Populations,
        Experiment::TeffScan,
        Experiment::LinearResponse,
        Experiment::ResponseMaxima,
        Experiment::Bistability,
        Experiment::Fluctuations,
        Experiment::Parametric,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Ringdown => "ringdown",
            Experiment::Populations => "populations",
            Experiment::TeffScan => "teff-scan",
            Experiment::LinearResponse => "linear-response",
            Experiment::ResponseMaxima => "response-maxima",
            Experiment::Bistability => "bistability",
            Experiment::Fluctuations => "fluctuations",
            Experiment::Parametric => "parametric",
        }
    }

    /// Runs the master equation rather than the classical equations.
    pub fn is_quantum(&self) -> bool {
        matches!(self, Experiment::Populations | Experiment::TeffScan | Experiment::Fluctuations | Experiment::Parametric)
    }

    fn sweep_variables(&self) -> &'static [SweepVariable] {
        use SweepVariable::*;
        match self {
            Experiment::Ringdown | Experiment::Populations => &[],
            Experiment::TeffScan | Experiment::ResponseMaxima => &[ThetaOverPi],
            Experiment::LinearResponse | Experiment::Bistability => &[Delta, Omega],
            Experiment::Fluctuations | Experiment::Parametric => &[DeltaOverU, Delta, Omega],
        }
    }

    fn drive_kind(&self) -> Option<DriveKind> {
        match self {
            Experiment::LinearResponse | Experiment::ResponseMaxima | Experiment::Bistability | Experiment::Fluctuations => {
                Some(DriveKind::Linear)
            }
            Experiment::Parametric => Some(DriveKind::TwoPhoton),
            Experiment::Ringdown | Experiment::Populations | Experiment::TeffScan => None,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyName {
    #[serde(rename = "CL")]
    Cl,
    #[serde(rename = "gCL")]
    Gcl,
    #[serde(rename = "lindblad", alias = "Lindblad")]
    Lindblad,
}

impl FamilyName {
    pub fn family(&self) -> Family {
        match self {
            FamilyName::Cl => Family::Cl,
            FamilyName::Gcl => Family::Gcl,
            FamilyName::Lindblad => Family::Lindblad,
        }
    }

    pub fn label(&self) -> &'static str {
        self.family().label()
    }
}

impl FromStr for FamilyName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "CL" | "cl" => Ok(FamilyName::Cl),
            "gCL" | "gcl" => Ok(FamilyName::Gcl),
            "lindblad" | "Lindblad" => Ok(FamilyName::Lindblad),
            _ => Err(format!("unknown family `{s}` (expected CL, gCL or lindblad)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub omega0: f64,
    pub gamma: f64,
    /// Coupling angle in units of pi.
    pub theta_over_pi: f64,
    pub n_th: f64,
    /// Kerr coefficient `U`.
    pub kerr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveKind {
    Linear,
    TwoPhoton,
}

/// Drive tone. Linear drives take `fq` (with `F = 2 sqrt(2 omega0) fq`) or the
/// raw `f`; two-photon drives take `g` (with `F2 = 2 omega0 g`) or the raw
/// `f2`, applied at twice the swept frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub kind: DriveKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<f64>,
    /// Drive frequency `omega` when it is not swept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

impl DriveSection {
    /// Raw amplitude entering the Hamiltonian.
    pub fn raw_amplitude(&self) -> f64 {
        match self.kind {
            DriveKind::Linear => self.f.unwrap_or(f64::NAN),
            DriveKind::TwoPhoton => self.f2.unwrap_or(f64::NAN),
        }
    }

    /// Tone at response frequency `omega`.
    pub fn tone(&self, omega: f64) -> DriveTone {
        match self.kind {
            DriveKind::Linear => DriveTone::linear(self.raw_amplitude(), omega),
            DriveKind::TwoPhoton => DriveTone::two_photon(self.raw_amplitude(), 2.0 * omega),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    /// Fock truncation `N`.
    pub dim: usize,
    pub steps_per_period: usize,
    /// Scales the RK4 step; values below one refine it.
    pub dt_factor: f64,
    /// Largest `|lambda| dt`; zero disables the bound.
    pub stability_bound: f64,
    pub max_doublings: u32,
    pub trace_tol: f64,
    pub positivity_eps: f64,
    pub residual_tol: f64,
    pub stroboscopic_tol: f64,
    pub max_periods: usize,
    pub snapshots: usize,
    /// Extrapolation window; zero disables it.
    pub extrapolation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    ThetaOverPi,
    /// `omega - omega0`
    Delta,
    Omega,
    /// `(omega - omega0)/U`
    DeltaOverU,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::ThetaOverPi => "theta_over_pi",
            SweepVariable::Delta => "delta",
            SweepVariable::Omega => "omega",
            SweepVariable::DeltaOverU => "delta_over_u",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepSection {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let n = (self.points - 1) as f64;
        (0..self.points).map(|k| self.start + (self.stop - self.start) * k as f64 / n).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingdownSection {
    /// Initial displacement; defaults to `threshold_factor` times the
    /// nonlinear-damping threshold, or 1 when there is none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<usize>,
    pub steps_per_period: usize,
    pub fit_fraction: f64,
    pub threshold_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    Population,
}

impl From<Weighting> for FitWeighting {
    fn from(w: Weighting) -> Self {
        match w {
            Weighting::Uniform => FitWeighting::Uniform,
            Weighting::Population => FitWeighting::Population,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeffSection {
    pub p_floor: f64,
    pub weighting: Weighting,
    pub min_levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HysteresisSection {
    pub dwell_periods: usize,
    pub average_periods: usize,
    pub drift_periods: usize,
    pub drift_tol: f64,
    pub steps_per_period: usize,
}

/// Output layout; `csv` writes the table plus a JSON metadata sidecar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    /// File stem; defaults to the experiment name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub families: Vec<FamilyName>,
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSection>,
    pub numerics: NumericsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ringdown: Option<RingdownSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teff: Option<TeffSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hysteresis: Option<HysteresisSection>,
    pub output: OutputSection,
}

fn config_error(path: &str, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}

const AMPLITUDE_KEYS: [&str; 4] = ["fq", "f", "g", "f2"];

/// Parse, layer defaults, apply `key.path=value` overrides and validate.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let mut user: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut user, o)?;
    }
    let experiment = match user.get("experiment") {
        Some(Value::String(s)) => s.parse::<Experiment>().map_err(|e| config_error("experiment", e))?,
        Some(_) => return Err(config_error("experiment", "must be a string")),
        None => return Err(config_error("experiment", "missing required field")),
    };
    let mut merged: Table = presets::BASE.parse().expect("base defaults parse");
    let mut preset: Table = presets::preset(experiment).parse().expect("preset parses");
    drop_superseded(&mut preset, &user);
    merge(&mut merged, preset);
    merge(&mut merged, user);
    let de = toml::Value::Table(merged);
    let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.inner()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Preset values that would conflict with the user's choices.
fn drop_superseded(preset: &mut Table, user: &Table) {
    if let (Some(Value::Table(p)), Some(Value::Table(u))) = (preset.get_mut("drive"), user.get("drive")) {
        if AMPLITUDE_KEYS.iter().any(|k| u.contains_key(*k)) || u.contains_key("kind") {
            for k in AMPLITUDE_KEYS {
                p.remove(k);
            }
        }
    }
    let user_var = user.get("sweep").and_then(|s| s.get("variable"));
    let preset_var = preset.get("sweep").and_then(|s| s.get("variable"));
    if user_var.is_some() && user_var != preset_var {
        preset.remove("sweep");
    }
}

fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Set `a.b.c = value` in `table`; the value is parsed as TOML, falling back
/// to a bare string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}`: expected key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override `{assignment}`: malformed key")));
    }
    let mut node = table;
    for p in &parts[..parts.len() - 1] {
        let entry = node.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        node = match entry {
            Value::Table(t) => t,
            _ => return Err(config_error(key, format!("`{p}` is not a section"))),
        };
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl ExperimentConfig {
    pub fn stem(&self) -> String {
        self.output.stem.clone().unwrap_or_else(|| self.experiment.name().to_string())
    }

    pub fn theta(&self) -> f64 {
        self.model.theta_over_pi * std::f64::consts::PI
    }

    /// Model parameters for `family` without any drive.
    pub fn base_params(&self, family: FamilyName) -> ModelParams {
        ModelParams {
            omega0: self.model.omega0,
            gamma: self.model.gamma,
            theta: self.theta(),
            n_th: self.model.n_th,
            kerr: self.model.kerr,
            drives: Vec::new(),
            dim: self.numerics.dim,
            family: family.family(),
        }
    }

    /// Response frequency for a sweep value of a frequency-like variable.
    pub fn omega_for(&self, variable: SweepVariable, value: f64) -> f64 {
        let w0 = self.model.omega0;
        match variable {
            SweepVariable::Omega => value,
            SweepVariable::Delta => w0 + value,
            SweepVariable::DeltaOverU => w0 + value * self.model.kerr,
            SweepVariable::ThetaOverPi => self.drive.as_ref().and_then(|d| d.omega).unwrap_or(w0),
        }
    }

    pub fn validate(&mut self) -> Result<(), CliError> {
        let exp = self.experiment;
        let m = &self.model;
        if !(m.omega0 > 0.0 && m.omega0.is_finite()) {
            return Err(config_error("model.omega0", format!("must be positive, got {}", m.omega0)));
        }
        if !(m.gamma >= 0.0 && m.gamma.is_finite()) {
            return Err(config_error("model.gamma", format!("must be non-negative, got {}", m.gamma)));
        }
        if exp.is_quantum() && m.gamma == 0.0 {
            return Err(config_error("model.gamma", "steady states need gamma > 0"));
        }
        if !(0.0..=0.5).contains(&m.theta_over_pi) {
            return Err(config_error(
                "model.theta_over_pi",
                format!("theta must lie in [0, pi/2], got {} pi", m.theta_over_pi),
            ));
        }
        if !(m.n_th >= 0.0 && m.n_th.is_finite()) {
            return Err(config_error("model.n_th", format!("must be non-negative, got {}", m.n_th)));
        }
        if !m.kerr.is_finite() {
            return Err(config_error("model.kerr", "must be finite"));
        }
        self.validate_families()?;
        self.validate_sections()?;
        self.validate_drive()?;
        self.validate_sweep()?;
        self.validate_numerics()
    }

    fn validate_families(&self) -> Result<(), CliError> {
        if self.families.is_empty() {
            return Err(config_error("families", "at least one family is required"));
        }
        for (k, f) in self.families.iter().enumerate() {
            if self.families[..k].contains(f) {
                return Err(config_error("families", format!("`{}` listed twice", f.label())));
            }
        }
        if self.families.contains(&FamilyName::Lindblad) {
            if !self.experiment.is_quantum() {
                return Err(config_error(
                    "families",
                    format!("lindblad has no semiclassical equations (experiment {})", self.experiment),
                ));
            }
            let swept = self.sweep.as_ref().is_some_and(|s| s.variable == SweepVariable::ThetaOverPi);
            if swept || (self.model.theta_over_pi - 0.25).abs() > 1e-12 {
                return Err(config_error(
                    "families",
                    format!(
                        "lindblad requires theta = pi/4 (model.theta_over_pi = 0.25), got {}",
                        if swept { "a theta sweep".to_string() } else { format!("{}", self.model.theta_over_pi) }
                    ),
                ));
            }
        }
        Ok(())
    }

    fn validate_sections(&self) -> Result<(), CliError> {
        use Experiment::*;
        let exp = self.experiment;
        let unused = |name: &str, present: bool| {
            if present {
                Err(config_error(name, format!("section not used by experiment {exp}")))
            } else {
                Ok(())
            }
        };
        unused("ringdown", self.ringdown.is_some() && exp != Ringdown)?;
        unused("teff", self.teff.is_some() && !matches!(exp, Populations | TeffScan))?;
        unused("hysteresis", self.hysteresis.is_some() && exp != Bistability)?;
        unused("sweep", self.sweep.is_some() && exp.sweep_variables().is_empty())?;
        if let Some(r) = &self.ringdown {
            if let Some(x0) = r.x0 {
                if !(x0 > 0.0 && x0.is_finite()) {
                    return Err(config_error("ringdown.x0", format!("must be positive, got {x0}")));
                }
            }
            if r.steps_per_period < 8 {
                return Err(config_error("ringdown.steps_per_period", "must be at least 8"));
            }
            if !(r.fit_fraction > 0.0 && r.fit_fraction <= 1.0) {
                return Err(config_error("ringdown.fit_fraction", "must lie in (0, 1]"));
            }
            if !(r.threshold_factor > 0.0) {
                return Err(config_error("ringdown.threshold_factor", "must be positive"));
            }
            if r.periods == Some(0) {
                return Err(config_error("ringdown.periods", "must be positive"));
            }
        }
        if let Some(t) = &self.teff {
            if !(t.p_floor >= 0.0 && t.p_floor < 1.0) {
                return Err(config_error("teff.p_floor", "must lie in [0, 1)"));
            }
            if t.min_levels < 2 {
                return Err(config_error("teff.min_levels", "must be at least 2"));
            }
        }
        if let Some(h) = &self.hysteresis {
            if h.dwell_periods == 0 || h.average_periods == 0 || h.drift_periods == 0 {
                return Err(config_error("hysteresis", "period counts must be positive"));
            }
            if h.average_periods > h.dwell_periods || h.drift_periods > h.dwell_periods {
                return Err(config_error("hysteresis.dwell_periods", "must cover the averaging and drift windows"));
            }
            if h.steps_per_period < 8 {
                return Err(config_error("hysteresis.steps_per_period", "must be at least 8"));
            }
        }
        if exp == Bistability && !(self.model.kerr > 0.0) {
            return Err(config_error("model.kerr", format!("bistability requires U > 0, got {}", self.model.kerr)));
        }
        if matches!(exp, LinearResponse | ResponseMaxima) && self.model.kerr != 0.0 {
            return Err(config_error("model.kerr", format!("{exp} is the closed-form linear response and needs U = 0")));
        }
        if matches!(exp, Ringdown | LinearResponse | ResponseMaxima | Bistability) && !(self.model.gamma > 0.0) {
            return Err(config_error("model.gamma", format!("{exp} needs gamma > 0")));
        }
        Ok(())
    }

    fn validate_drive(&mut self) -> Result<(), CliError> {
        let exp = self.experiment;
        let w0 = self.model.omega0;
        let Some(want) = exp.drive_kind() else {
            if self.drive.is_some() {
                return Err(config_error("drive", format!("experiment {exp} runs undriven")));
            }
            return Ok(());
        };
        let Some(d) = self.drive.as_mut() else {
            return Err(config_error("drive", format!("experiment {exp} requires a drive")));
        };
        if d.kind != want {
            let name = if want == DriveKind::Linear { "linear" } else { "two-photon" };
            return Err(config_error("drive.kind", format!("experiment {exp} requires a {name} drive")));
        }
        let (scaled, raw, scaled_name, raw_name) = match d.kind {
            DriveKind::Linear => (d.fq, d.f, "fq", "f"),
            DriveKind::TwoPhoton => (d.g, d.f2, "g", "f2"),
        };
        for (k, v) in [("fq", d.fq), ("f", d.f), ("g", d.g), ("f2", d.f2)] {
            if v.is_some() && k != scaled_name && k != raw_name {
                return Err(config_error(&format!("drive.{k}"), "does not apply to this drive kind"));
            }
        }
        let to_raw = |s: f64| match d.kind {
            DriveKind::Linear => fq_to_f(s, w0),
            DriveKind::TwoPhoton => g_to_f2(s, w0),
        };
        let amplitude = match (scaled, raw) {
            // both are accepted when they agree, as in an echoed config
            (Some(s), Some(r)) if (to_raw(s) - r).abs() <= 1e-12 * r.abs().max(1.0) => r,
            (Some(_), Some(_)) => {
                return Err(config_error(
                    &format!("drive.{raw_name}"),
                    format!("give either {scaled_name} or {raw_name}, not both"),
                ))
            }
            (None, None) => return Err(config_error(&format!("drive.{scaled_name}"), "missing drive amplitude")),
            (Some(s), None) => to_raw(s),
            (None, Some(r)) => r,
        };
        if !amplitude.is_finite() {
            return Err(config_error(&format!("drive.{scaled_name}"), "must be finite"));
        }
        match d.kind {
            DriveKind::Linear => {
                d.f = Some(amplitude);
                d.fq = Some(f_to_fq(amplitude, w0));
            }
            DriveKind::TwoPhoton => {
                d.f2 = Some(amplitude);
                d.g = Some(f2_to_g(amplitude, w0));
            }
        }
        if let Some(w) = d.omega {
            if !(w > 0.0 && w.is_finite()) {
                return Err(config_error("drive.omega", format!("must be positive, got {w}")));
            }
        }
        Ok(())
    }

    fn validate_sweep(&self) -> Result<(), CliError> {
        let exp = self.experiment;
        let allowed = exp.sweep_variables();
        if allowed.is_empty() {
            return Ok(());
        }
        let Some(s) = &self.sweep else {
            return Err(config_error("sweep", format!("experiment {exp} requires a sweep")));
        };
        if !allowed.contains(&s.variable) {
            let names: Vec<&str> = allowed.iter().map(SweepVariable::name).collect();
            return Err(config_error(
                "sweep.variable",
                format!("experiment {exp} sweeps one of {}, got {}", names.join(", "), s.variable.name()),
            ));
        }
        if s.points == 0 {
            return Err(config_error("sweep.points", "must be positive"));
        }
        if !(s.start.is_finite() && s.stop.is_finite()) || (s.points > 1 && s.stop <= s.start) {
            return Err(config_error("sweep", format!("need start < stop, got {}..{}", s.start, s.stop)));
        }
        if s.variable == SweepVariable::DeltaOverU && self.model.kerr == 0.0 {
            return Err(config_error("sweep.variable", "delta_over_u needs U != 0"));
        }
        if s.variable == SweepVariable::ThetaOverPi && (s.start < 0.0 || s.stop > 0.5) {
            return Err(config_error("sweep", "theta must lie in [0, pi/2]"));
        }
        if s.variable != SweepVariable::ThetaOverPi {
            for v in s.values() {
                let w = self.omega_for(s.variable, v);
                if !(w > 0.0) {
                    return Err(config_error("sweep", format!("value {v} gives a non-positive frequency {w}")));
                }
            }
        }
        Ok(())
    }

    fn validate_numerics(&self) -> Result<(), CliError> {
        let n = &self.numerics;
        let min_dim = if matches!(self.experiment, Experiment::Populations | Experiment::TeffScan) {
            TRUNCATION_GUARD + 3
        } else {
            2
        };
        if n.dim < min_dim {
            return Err(config_error("numerics.dim", format!("must be at least {min_dim}, got {}", n.dim)));
        }
        if n.steps_per_period == 0 {
            return Err(config_error("numerics.steps_per_period", "must be positive"));
        }
        if !(n.dt_factor > 0.0 && n.dt_factor <= 1.0) {
            return Err(config_error("numerics.dt_factor", format!("must lie in (0, 1], got {}", n.dt_factor)));
        }
        if !(n.stability_bound >= 0.0) {
            return Err(config_error("numerics.stability_bound", "must be non-negative"));
        }
        for (name, v) in [
            ("numerics.trace_tol", n.trace_tol),
            ("numerics.positivity_eps", n.positivity_eps),
            ("numerics.residual_tol", n.residual_tol),
            ("numerics.stroboscopic_tol", n.stroboscopic_tol),
        ] {
            if !(v > 0.0) {
                return Err(config_error(name, format!("must be positive, got {v}")));
            }
        }
        if n.max_periods == 0 {
            return Err(config_error("numerics.max_periods", "must be positive"));
        }
        if n.snapshots < gcl_core::observables::MIN_SNAPSHOTS {
            return Err(config_error(
                "numerics.snapshots",
                format!("must be at least {}", gcl_core::observables::MIN_SNAPSHOTS),
            ));
        }
        Ok(())
    }
}
