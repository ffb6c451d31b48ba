//! End-to-end numerical experiments: the two-train control experiment, delay
//! and period scans, the quantum–classical transition at fixed stochasticity
//! and single-train resonance maps.
//!
//! Every driver is a pure function of its [`ExperimentConfig`]. Ensemble
//! members and grid points are evaluated in parallel and reduced in a fixed
//! order, so results are bit-identical for any thread count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{Parity, RotorBasis, WavePacket};
use crate::classical::{classical_energy_trace, classical_train_trace, ClassicalSampling};
use crate::ensembles::{
    boltzmann_ensemble, ensemble_average, MoleculeSpec, ThermalEnsemble, DEFAULT_WEIGHT_CUTOFF,
};
use crate::error::{Error, Result};
use crate::kick::Cos2Spectrum;
use crate::observables::{
    break_time_estimate, degree_of_control, participation_ratio, raman_forward, EnergyTrace,
    PopulationDistribution,
};
use crate::propagate::{PulseModel, TrainPropagator, DEFAULT_LEAK_THRESHOLD};
use crate::pulse::{PulseSpec, PulseTrain, TwoStageTrain};
use crate::resonance::{period_from_tau, tau_from_period};

/// Tail-slope tolerance used for the break-time metric.
pub const BREAK_SLOPE_TOLERANCE: f64 = 0.1;

/// Tolerance on `τ·P` across transition cases.
pub const STOCHASTICITY_TOLERANCE: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MoleculeRef {
    Name(String),
    Spec(MoleculeSpec),
}

impl MoleculeRef {
    pub fn resolve(&self) -> Result<MoleculeSpec> {
        match self {
            MoleculeRef::Name(name) => MoleculeSpec::lookup(name).ok_or_else(|| {
                let known: Vec<String> = MoleculeSpec::catalog()
                    .into_iter()
                    .map(|m| m.name)
                    .collect();
                Error::config(
                    "molecule",
                    format!("unknown molecule `{name}` (catalog: {})", known.join(", ")),
                )
            }),
            MoleculeRef::Spec(spec) => {
                spec.validate()
                    .map_err(|e| Error::config("molecule", e.to_string()))?;
                Ok(spec.clone())
            }
        }
    }
}

/// A list of values, either explicit or `start..=stop` in steps of `step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Grid::Range { start, stop, step }
    }

    /// Grid points; range points are `start + i·step`, computed without
    /// accumulation.
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n).map(|i| start + i as f64 * step).collect()
            }
        }
    }

    fn validate(&self, key: &str) -> Result<()> {
        match self {
            Grid::Values(v) => {
                if v.is_empty() {
                    return Err(Error::config(key, "grid is empty"));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::config(key, "grid values must be finite"));
                }
            }
            Grid::Range { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
                    return Err(Error::config(key, "grid bounds must be finite"));
                }
                if *step <= 0.0 {
                    return Err(Error::config(
                        key,
                        format!("step must be positive, got {step}"),
                    ));
                }
                if stop < start {
                    return Err(Error::config(
                        key,
                        format!("stop {stop} is below start {start}"),
                    ));
                }
                if (stop - start) / step > 1e7 {
                    return Err(Error::config(key, "grid has more than 10^7 points"));
                }
            }
        }
        Ok(())
    }

    fn validate_positive(&self, key: &str) -> Result<()> {
        self.validate(key)?;
        if self.points().iter().any(|x| *x <= 0.0) {
            return Err(Error::config(key, "grid values must be positive"));
        }
        Ok(())
    }
}

/// Pure initial state: either the basis state `|j, m⟩` or raw amplitudes
/// over `J` at fixed `m` (normalized on input).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<u32>,
    #[serde(default)]
    pub m: i32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub amplitudes: Vec<RawAmplitude>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAmplitude {
    pub j: u32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl InitialState {
    pub fn basis_state(j: u32, m: i32) -> Self {
        Self {
            j: Some(j),
            m,
            amplitudes: Vec::new(),
        }
    }

    /// Levels carrying weight, with their populations before normalization.
    fn level_weights(&self) -> Vec<(u32, f64)> {
        match self.j {
            Some(j) => vec![(j, 1.0)],
            None => {
                // Repeated J entries add coherently.
                let mut amp: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
                for a in &self.amplitudes {
                    let e = amp.entry(a.j).or_default();
                    e.0 += a.re;
                    e.1 += a.im;
                }
                amp.into_iter()
                    .map(|(j, (re, im))| (j, re * re + im * im))
                    .filter(|(_, p)| *p > 0.0)
                    .collect()
            }
        }
    }

    fn validate(&self, j_max: u32) -> Result<()> {
        match (self.j, self.amplitudes.is_empty()) {
            (Some(_), false) => {
                return Err(Error::config(
                    "initial",
                    "give either `j` or `amplitudes`, not both",
                ))
            }
            (None, true) => {
                return Err(Error::config(
                    "initial",
                    "one of `j` or `amplitudes` is required",
                ))
            }
            _ => {}
        }
        for a in &self.amplitudes {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::config(
                    "initial.amplitudes",
                    "amplitudes must be finite",
                ));
            }
        }
        let levels = self.level_weights();
        if levels.is_empty() {
            return Err(Error::config(
                "initial.amplitudes",
                "all amplitudes are zero",
            ));
        }
        for (j, _) in &levels {
            if self.m.unsigned_abs() > *j {
                return Err(Error::config("initial.m", format!("|m| exceeds J = {j}")));
            }
            if *j > j_max {
                return Err(Error::config(
                    "initial",
                    format!("J = {j} exceeds basis.j_max"),
                ));
            }
        }
        Ok(())
    }

    fn wave_packet(&self, j_max: u32) -> Result<WavePacket> {
        let levels = self.level_weights();
        let parity = if levels.iter().all(|(j, _)| j % 2 == 0) {
            Parity::Even
        } else if levels.iter().all(|(j, _)| j % 2 == 1) {
            Parity::Odd
        } else {
            Parity::Both
        };
        let basis = RotorBasis::new(j_max, parity, self.m)?;
        let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); basis.len()];
        match self.j {
            Some(j) => amps[basis.index_of(j).expect("validated level")] = 1.0.into(),
            None => {
                for a in &self.amplitudes {
                    if let Some(i) = basis.index_of(a.j) {
                        amps[i] += num_complex::Complex64::new(a.re, a.im);
                    }
                }
            }
        }
        WavePacket::normalized(basis, amps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSettings {
    pub weight_cutoff: f64,
}

impl Default for EnsembleSettings {
    fn default() -> Self {
        Self {
            weight_cutoff: DEFAULT_WEIGHT_CUTOFF,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisSettings {
    pub j_max: u32,
    pub leak_threshold: f64,
}

impl Default for BasisSettings {
    fn default() -> Self {
        Self {
            j_max: 60,
            leak_threshold: DEFAULT_LEAK_THRESHOLD,
        }
    }
}

/// Two-stage train; times in T_rev.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSettings {
    pub n_pre: usize,
    pub period_pre: f64,
    /// Control delays ΔT from the last preparation pulse to the first
    /// localizing pulse; the control experiment compares the first two.
    pub delay: Vec<f64>,
    pub n_loc: usize,
    pub period_loc: f64,
    pub strength: f64,
    /// Preparation-pulse strength; defaults to `strength`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strength_pre: Option<f64>,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            n_pre: 3,
            period_pre: 0.237,
            delay: vec![0.243, 0.264],
            n_loc: 12,
            period_loc: 0.267,
            strength: 3.8,
            strength_pre: None,
        }
    }
}

impl TrainSettings {
    pub fn two_stage(&self, delay: f64) -> TwoStageTrain {
        TwoStageTrain {
            n_pre: self.n_pre,
            period_pre: self.period_pre,
            strength_pre: self.strength_pre.unwrap_or(self.strength),
            delay,
            n_loc: self.n_loc,
            period_loc: self.period_loc,
            strength_loc: self.strength,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSettings {
    pub delta_kick: bool,
    /// Intensity FWHM of finite pulses, T_rev.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fwhm: Option<f64>,
    /// Split-step size for finite pulses, T_rev; defaults to fwhm/20.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            delta_kick: true,
            fwhm: None,
            dt: None,
        }
    }
}

impl ModelSettings {
    /// The propagation model and pulse width this setting selects.
    pub fn resolve(&self) -> Result<(PulseModel, Option<f64>)> {
        if self.delta_kick {
            return Ok((PulseModel::Delta, None));
        }
        let fwhm = self
            .fwhm
            .ok_or_else(|| Error::config("model.fwhm", "required when delta_kick = false"))?;
        if !(fwhm.is_finite() && fwhm > 0.0) {
            return Err(Error::config(
                "model.fwhm",
                format!("must be positive, got {fwhm}"),
            ));
        }
        let dt = self.dt.unwrap_or(fwhm / 20.0);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::config(
                "model.dt",
                format!("must be positive, got {dt}"),
            ));
        }
        if dt > fwhm / 4.0 {
            return Err(Error::config(
                "model.dt",
                format!("step {dt} is coarser than fwhm/4 = {}", fwhm / 4.0),
            ));
        }
        Ok((PulseModel::Finite { dt }, Some(fwhm)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSettings {
    /// Delay grid for `scan-delay`.
    pub delay: Grid,
    /// Localizing periods for `scan-period`.
    pub period_loc: Vec<f64>,
    /// Whether `scan-period` re-optimizes the delays.
    pub optimize: bool,
    /// Delay grid searched when optimizing.
    pub optimize_delay: Grid,
    /// Train periods for `resonance-map`.
    pub period: Grid,
    /// Kicks per train for `resonance-map`.
    pub n_kicks: usize,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            delay: Grid::range(0.001, 1.0, 0.001),
            period_loc: vec![0.260, 0.261, 0.263, 0.267, 0.270],
            optimize: true,
            optimize_delay: Grid::range(0.2, 0.3, 0.001),
            period: Grid::range(0.005, 1.0, 0.005),
            n_kicks: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionCase {
    pub tau: f64,
    pub strength: f64,
}

impl TransitionCase {
    pub fn stochasticity(&self) -> f64 {
        self.tau * self.strength
    }

    fn label(&self) -> String {
        format!("tau{}", self.tau)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransitionSettings {
    pub cases: Vec<TransitionCase>,
    /// Total kicks (preparation included).
    pub n_kicks: usize,
    /// Kick index at which the degree of control is reported.
    pub control_kick: usize,
    pub classical_trajectories: usize,
}

impl Default for TransitionSettings {
    fn default() -> Self {
        Self {
            cases: vec![
                TransitionCase {
                    tau: 1.7,
                    strength: 2.0,
                },
                TransitionCase {
                    tau: 0.6,
                    strength: 3.4 / 0.6,
                },
            ],
            n_kicks: 40,
            control_kick: 15,
            classical_trajectories: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalSettings {
    pub trajectories: usize,
    pub n_kicks: usize,
    pub tau: f64,
    pub strength: f64,
}

impl Default for ClassicalSettings {
    fn default() -> Self {
        Self {
            trajectories: 20_000,
            n_kicks: 50,
            tau: 1.66,
            strength: 3.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSettings {
    /// Populations below this are dropped before the Raman forward model
    /// (0 disables the floor).
    pub noise_floor: f64,
}

/// A complete experiment description. All times are in units of T_rev and
/// strengths are dimensionless; omitted keys take the values of the
/// two-train oxygen control experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_molecule")]
    pub molecule: MoleculeRef,
    #[serde(rename = "temperature_K", default = "default_temperature")]
    pub temperature_k: f64,
    #[serde(default)]
    pub seed: u64,
    /// Pure initial state; absent means a thermal ensemble.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialState>,
    #[serde(default)]
    pub ensemble: EnsembleSettings,
    #[serde(default)]
    pub basis: BasisSettings,
    #[serde(default)]
    pub train: TrainSettings,
    #[serde(default)]
    pub model: ModelSettings,
    #[serde(default)]
    pub scan: ScanSettings,
    #[serde(default)]
    pub transition: TransitionSettings,
    #[serde(default)]
    pub classical: ClassicalSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

fn default_molecule() -> MoleculeRef {
    MoleculeRef::Name("O2".into())
}

fn default_temperature() -> f64 {
    25.0
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            molecule: default_molecule(),
            temperature_k: default_temperature(),
            seed: 0,
            initial: None,
            ensemble: EnsembleSettings::default(),
            basis: BasisSettings::default(),
            train: TrainSettings::default(),
            model: ModelSettings::default(),
            scan: ScanSettings::default(),
            transition: TransitionSettings::default(),
            classical: ClassicalSettings::default(),
            output: OutputSettings::default(),
        }
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be non-negative, got {v}")))
    }
}

impl ExperimentConfig {
    /// Checks ranges and cross-field constraints, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        self.molecule.resolve()?;
        non_negative("temperature_K", self.temperature_k)?;
        let w = self.ensemble.weight_cutoff;
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::config(
                "ensemble.weight_cutoff",
                format!("must lie in (0, 1), got {w}"),
            ));
        }
        if self.basis.j_max == 0 {
            return Err(Error::config("basis.j_max", "must be at least 1"));
        }
        if let Some(init) = &self.initial {
            init.validate(self.basis.j_max)?;
        }
        let lt = self.basis.leak_threshold;
        if !(lt > 0.0 && lt <= 1.0) {
            return Err(Error::config(
                "basis.leak_threshold",
                format!("must lie in (0, 1], got {lt}"),
            ));
        }

        let t = &self.train;
        positive("train.period_pre", t.period_pre)?;
        positive("train.period_loc", t.period_loc)?;
        non_negative("train.strength", t.strength)?;
        if let Some(p) = t.strength_pre {
            non_negative("train.strength_pre", p)?;
        }
        if t.delay.is_empty() {
            return Err(Error::config(
                "train.delay",
                "at least one delay is required",
            ));
        }
        for d in &t.delay {
            non_negative("train.delay", *d)?;
        }

        self.model.resolve()?;

        let s = &self.scan;
        s.delay.validate("scan.delay")?;
        for d in s.delay.points() {
            non_negative("scan.delay", d)?;
        }
        if s.period_loc.is_empty() {
            return Err(Error::config("scan.period_loc", "list is empty"));
        }
        for p in &s.period_loc {
            positive("scan.period_loc", *p)?;
        }
        s.optimize_delay.validate("scan.optimize_delay")?;
        s.period.validate_positive("scan.period")?;
        if s.n_kicks == 0 {
            return Err(Error::config("scan.n_kicks", "must be at least 1"));
        }

        let tr = &self.transition;
        if tr.cases.is_empty() {
            return Err(Error::config("transition.cases", "list is empty"));
        }
        for c in &tr.cases {
            positive("transition.cases.tau", c.tau)?;
            non_negative("transition.cases.strength", c.strength)?;
        }
        let k0 = tr.cases[0].stochasticity();
        if let Some(c) = tr
            .cases
            .iter()
            .find(|c| (c.stochasticity() - k0).abs() > STOCHASTICITY_TOLERANCE)
        {
            return Err(Error::config(
                "transition.cases",
                format!(
                    "all cases must share K = τP (first case K = {k0}, case τ = {} has K = {})",
                    c.tau,
                    c.stochasticity()
                ),
            ));
        }
        if tr.n_kicks <= t.n_pre {
            return Err(Error::config(
                "transition.n_kicks",
                "must exceed train.n_pre",
            ));
        }
        if tr.control_kick == 0 || tr.control_kick > tr.n_kicks {
            return Err(Error::config(
                "transition.control_kick",
                "must lie in 1..=n_kicks",
            ));
        }
        if tr.classical_trajectories == 0 {
            return Err(Error::config(
                "transition.classical_trajectories",
                "must be at least 1",
            ));
        }

        let c = &self.classical;
        if c.trajectories == 0 {
            return Err(Error::config(
                "classical.trajectories",
                "must be at least 1",
            ));
        }
        if c.n_kicks == 0 {
            return Err(Error::config("classical.n_kicks", "must be at least 1"));
        }
        non_negative("classical.tau", c.tau)?;
        non_negative("classical.strength", c.strength)?;
        non_negative("output.noise_floor", self.output.noise_floor)?;
        if self.output.noise_floor >= 1.0 {
            return Err(Error::config("output.noise_floor", "must be below 1"));
        }
        Ok(())
    }

    fn two_delays(&self) -> Result<(f64, f64)> {
        match self.train.delay.as_slice() {
            [d1, d2] => Ok((*d1, *d2)),
            other => Err(Error::config(
                "train.delay",
                format!("exactly two delays are required, got {}", other.len()),
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Simulate,
    ScanDelay,
    ScanPeriod,
    Transition,
    ResonanceMap,
    Classical,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Simulate => "simulate",
            Scenario::ScanDelay => "scan-delay",
            Scenario::ScanPeriod => "scan-period",
            Scenario::Transition => "transition",
            Scenario::ResonanceMap => "resonance-map",
            Scenario::Classical => "classical",
        }
    }
}

/// Populations of one `(J, m)` level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPopulation {
    pub j: u32,
    pub m: i32,
    pub population: f64,
}

/// One simulated configuration point.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub trace: EnergyTrace,
    /// Ensemble-averaged final `P_J` (absent for classical traces).
    pub populations: Option<PopulationDistribution>,
    /// Exact m-resolved final populations.
    pub m_resolved: Vec<LevelPopulation>,
}

/// Scan output: one row per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub label: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Everything needed to rerun an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config: ExperimentConfig,
    pub molecule: MoleculeSpec,
    pub revival_period_s: f64,
    pub code_version: String,
    pub seed: u64,
    pub ensemble_members: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub scenario: Scenario,
    pub series: Vec<Series>,
    pub tables: Vec<Table>,
    pub metrics: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

impl ExperimentResult {
    pub fn series(&self, label: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.label == label)
    }

    pub fn table(&self, label: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.label == label)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }
}

// ---------------------------------------------------------------------------
// Ensemble engine
// ---------------------------------------------------------------------------

/// Thermal-ensemble averages of one pulse train.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub trace: EnergyTrace,
    pub populations: PopulationDistribution,
    pub m_resolved: Vec<LevelPopulation>,
}

/// Resolved molecule, ensemble and cached cos²θ spectra for one config.
#[derive(Debug, Clone)]
pub struct Simulator {
    molecule: MoleculeSpec,
    ensemble: ThermalEnsemble,
    j_max: u32,
    leak_threshold: f64,
    model: PulseModel,
    fwhm: Option<f64>,
    /// Keyed by `(|m|, parity)`.
    spectra: BTreeMap<(u32, Parity), Cos2Spectrum>,
    /// Raw-amplitude initial state, replacing the ensemble.
    raw: Option<WavePacket>,
}

impl Simulator {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let molecule = config.molecule.resolve()?;
        let j_max = config.basis.j_max;
        let (ensemble, raw) = match &config.initial {
            Some(init) => match init.j {
                Some(j) => (ThermalEnsemble::pure(j, init.m)?, None),
                None => {
                    let state = init.wave_packet(j_max)?;
                    let j0 = init.level_weights()[0].0;
                    (ThermalEnsemble::pure(j0, init.m)?, Some(state))
                }
            },
            None => (
                boltzmann_ensemble(
                    &molecule,
                    config.temperature_k,
                    config.ensemble.weight_cutoff,
                )?,
                None,
            ),
        };
        if ensemble.max_j() > config.basis.j_max {
            return Err(Error::config(
                "basis.j_max",
                format!(
                    "below the highest initial level J = {} of the ensemble",
                    ensemble.max_j()
                ),
            ));
        }
        let (model, fwhm) = config.model.resolve()?;
        let keys: Vec<(u32, Parity)> = if let Some(state) = &raw {
            vec![(state.basis().m().unsigned_abs(), state.basis().parity())]
        } else {
            let mut k: Vec<_> = ensemble
                .members()
                .iter()
                .map(|m| (m.m0.unsigned_abs(), Parity::of(m.j0)))
                .collect();
            k.sort();
            k.dedup();
            k
        };
        let spectra = keys
            .par_iter()
            .map(|&(m, parity)| {
                let basis = RotorBasis::new(j_max, parity, m as i32)?;
                Ok(((m, parity), Cos2Spectrum::new(&basis)?))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Self {
            molecule,
            ensemble,
            j_max,
            leak_threshold: config.basis.leak_threshold,
            model,
            fwhm,
            spectra,
            raw,
        })
    }

    pub fn molecule(&self) -> &MoleculeSpec {
        &self.molecule
    }

    pub fn ensemble(&self) -> &ThermalEnsemble {
        &self.ensemble
    }

    /// Propagates every ensemble member through `train` (widened to the
    /// configured FWHM in the finite-pulse model) and averages.
    pub fn run(&self, train: &PulseTrain) -> Result<EnsembleRun> {
        let train = match self.model {
            PulseModel::Delta => train.clone(),
            PulseModel::Finite { .. } => train.with_fwhm(self.fwhm)?,
        };
        let propagators: BTreeMap<(u32, Parity), TrainPropagator> = self
            .spectra
            .par_iter()
            .map(|(key, spectrum)| {
                Ok((
                    *key,
                    TrainPropagator::with_spectrum(
                        spectrum,
                        &train,
                        self.model,
                        self.leak_threshold,
                    )?,
                ))
            })
            .collect::<Result<_>>()?;
        if let Some(state) = &self.raw {
            let prop = propagators.values().next().expect("one sector");
            return self.run_pure(prop, state);
        }

        // ±m give identical level populations; simulate m >= 0 only.
        let mut unique: Vec<(u32, u32)> = self
            .ensemble
            .members()
            .iter()
            .map(|m| (m.j0, m.m0.unsigned_abs()))
            .collect();
        unique.sort();
        unique.dedup();

        let n_points = train.len() + 1;
        let levels = self.j_max as usize + 1;
        let per_member: Vec<((u32, u32), Vec<f64>)> = unique
            .par_iter()
            .map(|&(j0, m_abs)| {
                let wrap = |e: Error| Error::Member {
                    j0,
                    m0: m_abs as i32,
                    source: Box::new(e),
                };
                let prop = &propagators[&(m_abs, Parity::of(j0))];
                let initial = WavePacket::basis_state(prop.basis().clone(), j0).map_err(wrap)?;
                let mut out = vec![0.0; n_points + levels];
                let last = prop
                    .evolve(&initial, |k, _, state| out[k] = state.energy())
                    .map_err(wrap)?;
                for (j, p) in last.level_populations() {
                    out[n_points + j as usize] = p;
                }
                Ok(((j0, m_abs), out))
            })
            .collect::<Result<_>>()?;
        let by_key: BTreeMap<(u32, u32), Vec<f64>> = per_member.into_iter().collect();

        let results: BTreeMap<(u32, i32), Vec<f64>> = self
            .ensemble
            .members()
            .iter()
            .map(|m| ((m.j0, m.m0), by_key[&(m.j0, m.m0.unsigned_abs())].clone()))
            .collect();
        let averaged = ensemble_average(&self.ensemble, &results)?;

        let prop = propagators.values().next().expect("at least one sector");
        let times: Vec<f64> = (0..n_points).map(|k| prop.snapshot_time(k)).collect();
        let trace = EnergyTrace::from_energies(&times, &averaged[..n_points])?;
        let pops: BTreeMap<u32, f64> = averaged[n_points..]
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(j, p)| (j as u32, *p))
            .collect();
        let populations = PopulationDistribution::from_weights(pops)?;

        let mut m_levels: BTreeMap<(u32, i32), f64> = BTreeMap::new();
        for m in self.ensemble.sorted_members() {
            let r = &results[&(m.j0, m.m0)];
            for (j, p) in r[n_points..].iter().enumerate() {
                if *p > 0.0 {
                    *m_levels.entry((j as u32, m.m0)).or_default() += m.weight * p;
                }
            }
        }
        let m_resolved = m_levels
            .into_iter()
            .map(|((j, m), population)| LevelPopulation { j, m, population })
            .collect();
        Ok(EnsembleRun {
            trace,
            populations,
            m_resolved,
        })
    }

    fn run_pure(&self, prop: &TrainPropagator, initial: &WavePacket) -> Result<EnsembleRun> {
        let mut energies = vec![0.0; prop.pulse_count() + 1];
        let last = prop.evolve(initial, |k, _, state| energies[k] = state.energy())?;
        let times: Vec<f64> = (0..energies.len()).map(|k| prop.snapshot_time(k)).collect();
        let populations = crate::observables::populations(&last);
        let m = last.basis().m();
        let m_resolved = populations
            .iter()
            .map(|(j, population)| LevelPopulation { j, m, population })
            .collect();
        Ok(EnsembleRun {
            trace: EnergyTrace::from_energies(&times, &energies)?,
            populations,
            m_resolved,
        })
    }

    /// Final ensemble energy only.
    pub fn final_energy(&self, train: &PulseTrain) -> Result<(f64, f64)> {
        let run = self.run(train)?;
        let last = run
            .trace
            .points()
            .last()
            .expect("trace has the initial point");
        Ok((last.energy, last.absorbed))
    }
}

fn provenance(config: &ExperimentConfig, sim: &Simulator) -> Provenance {
    Provenance {
        config: config.clone(),
        molecule: sim.molecule.clone(),
        revival_period_s: sim.molecule.revival_period_s(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        ensemble_members: sim.ensemble.len(),
    }
}

fn series_from_run(label: impl Into<String>, run: EnsembleRun) -> Series {
    Series {
        label: label.into(),
        trace: run.trace,
        populations: Some(run.populations),
        m_resolved: run.m_resolved,
    }
}

/// Populations seen through the Raman model with the configured floor.
pub fn detected_spectrum(
    pop: &PopulationDistribution,
    noise_floor: f64,
) -> Result<crate::observables::RamanSpectrum> {
    if noise_floor > 0.0 {
        raman_forward(&pop.above_floor(noise_floor)?)
    } else {
        raman_forward(pop)
    }
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

/// Thermal-averaged energy traces and final populations for the two control
/// delays, with the degree of control between them.
pub fn run_control_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let sim = Simulator::new(config)?;
    let (d1, d2) = config.two_delays()?;
    let runs: Vec<EnsembleRun> = [d1, d2]
        .par_iter()
        .map(|&d| sim.run(&config.train.two_stage(d).build()?))
        .collect::<Result<_>>()?;

    let mut metrics = BTreeMap::new();
    let finals: Vec<(f64, f64)> = runs
        .iter()
        .map(|r| {
            let p = r.trace.points().last().expect("non-empty trace");
            (p.energy, p.absorbed)
        })
        .collect();
    metrics.insert(
        "degree_of_control".into(),
        degree_of_control(finals[0].0, finals[1].0)?,
    );
    if finals[0].1 + finals[1].1 > 0.0 {
        metrics.insert(
            "degree_of_control_absorbed".into(),
            degree_of_control(finals[0].1, finals[1].1)?,
        );
    }
    for (i, (run, (energy, absorbed))) in runs.iter().zip(&finals).enumerate() {
        let n = i + 1;
        metrics.insert(format!("delay_{n}"), config.train.delay[i]);
        metrics.insert(format!("final_energy_{n}"), *energy);
        metrics.insert(format!("absorbed_energy_{n}"), *absorbed);
        metrics.insert(
            format!("participation_ratio_{n}"),
            participation_ratio(&run.populations),
        );
        if let Some(j) = run.populations.peak() {
            metrics.insert(format!("peak_j_{n}"), f64::from(j));
        }
        if let Some(k) = break_time_estimate(&run.trace, BREAK_SLOPE_TOLERANCE) {
            metrics.insert(format!("break_time_{n}"), k as f64);
        }
    }
    let series = runs
        .into_iter()
        .enumerate()
        .map(|(i, r)| series_from_run(format!("delay_{}", i + 1), r))
        .collect();
    Ok(ExperimentResult {
        scenario: Scenario::Simulate,
        series,
        tables: Vec::new(),
        metrics,
        provenance: provenance(config, &sim),
    })
}

fn delay_energies(
    sim: &Simulator,
    train: &TrainSettings,
    delays: &[f64],
) -> Result<Vec<(f64, f64)>> {
    delays
        .par_iter()
        .map(|&d| sim.final_energy(&train.two_stage(d).build()?))
        .collect()
}

/// Final energy as a function of the delay between the two trains.
pub fn scan_delay(config: &ExperimentConfig, delays: &[f64]) -> Result<ExperimentResult> {
    let sim = Simulator::new(config)?;
    let energies = delay_energies(&sim, &config.train, delays)?;
    let rows = delays
        .iter()
        .zip(&energies)
        .map(|(d, (e, a))| vec![*d, *e, *a])
        .collect();
    let mut metrics = BTreeMap::new();
    metrics.insert("grid_points".into(), delays.len() as f64);
    Ok(ExperimentResult {
        scenario: Scenario::ScanDelay,
        series: Vec::new(),
        tables: vec![Table {
            label: "delay_scan".into(),
            columns: vec!["delay".into(), "final_energy_B".into(), "absorbed_B".into()],
            rows,
        }],
        metrics,
        provenance: provenance(config, &sim),
    })
}

/// Degree of control at fixed delays for each localizing period and, when
/// `optimize_grid` is given, after an exhaustive search for the delays of
/// highest and lowest final energy. The fixed delays are always part of the
/// searched set.
pub fn scan_period_sensitivity(
    config: &ExperimentConfig,
    periods_loc: &[f64],
    fixed_delays: (f64, f64),
    optimize_grid: Option<&[f64]>,
) -> Result<ExperimentResult> {
    let sim = Simulator::new(config)?;
    let (d1, d2) = fixed_delays;
    let search: Option<Vec<f64>> = optimize_grid.map(|g| {
        let mut s = g.to_vec();
        for d in [d1, d2] {
            if !s.contains(&d) {
                s.push(d);
            }
        }
        s
    });

    let mut columns: Vec<String> = ["period_loc", "energy_1", "energy_2", "control_fixed"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if search.is_some() {
        columns.extend(
            [
                "delay_max",
                "delay_min",
                "energy_max",
                "energy_min",
                "control_optimized",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
    }

    let rows: Vec<Vec<f64>> = periods_loc
        .iter()
        .map(|&period_loc| {
            let train = TrainSettings {
                period_loc,
                ..config.train.clone()
            };
            let fixed = delay_energies(&sim, &train, &[d1, d2])?;
            let (e1, e2) = (fixed[0].0, fixed[1].0);
            let mut row = vec![period_loc, e1, e2, degree_of_control(e1, e2)?];
            if let Some(grid) = &search {
                let energies = delay_energies(&sim, &train, grid)?;
                let mut i_max = 0;
                let mut i_min = 0;
                for (i, (e, _)) in energies.iter().enumerate() {
                    if *e > energies[i_max].0 {
                        i_max = i;
                    }
                    if *e < energies[i_min].0 {
                        i_min = i;
                    }
                }
                let (e_max, e_min) = (energies[i_max].0, energies[i_min].0);
                row.extend([
                    grid[i_max],
                    grid[i_min],
                    e_max,
                    e_min,
                    degree_of_control(e_max, e_min)?,
                ]);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let table = Table {
        label: "period_scan".into(),
        columns,
        rows,
    };
    let mut metrics = BTreeMap::new();
    if let Some(fixed) = table.column("control_fixed") {
        let abs: Vec<f64> = fixed.iter().map(|c| c.abs()).collect();
        metrics.insert(
            "control_fixed_max".into(),
            abs.iter().copied().fold(0.0, f64::max),
        );
        metrics.insert(
            "control_fixed_min".into(),
            abs.iter().copied().fold(f64::INFINITY, f64::min),
        );
    }
    if let Some(opt) = table.column("control_optimized") {
        metrics.insert(
            "control_optimized_min".into(),
            opt.iter().copied().fold(f64::INFINITY, f64::min),
        );
    }
    Ok(ExperimentResult {
        scenario: Scenario::ScanPeriod,
        series: Vec::new(),
        tables: vec![table],
        metrics,
        provenance: provenance(config, &sim),
    })
}

/// For each `(τ, P)` case: quantum traces for both control delays with a
/// localizing period `τ/2π`, and the classical trace over the same
/// (first-delay) train.
pub fn quantum_classical_transition(
    config: &ExperimentConfig,
    cases: &[TransitionCase],
    n_kicks: usize,
) -> Result<ExperimentResult> {
    if cases.is_empty() {
        return Err(Error::config("transition.cases", "list is empty"));
    }
    let k0 = cases[0].stochasticity();
    if let Some(c) = cases
        .iter()
        .find(|c| (c.stochasticity() - k0).abs() > STOCHASTICITY_TOLERANCE)
    {
        return Err(Error::config(
            "transition.cases",
            format!(
                "K = τP differs across cases ({k0} vs {})",
                c.stochasticity()
            ),
        ));
    }
    if n_kicks <= config.train.n_pre {
        return Err(Error::config(
            "transition.n_kicks",
            "must exceed train.n_pre",
        ));
    }
    let sim = Simulator::new(config)?;
    let (d1, d2) = config.two_delays()?;
    let sampling = ClassicalSampling::from_ensemble(&sim.ensemble)?;
    let control_kick = config.transition.control_kick.min(n_kicks);

    let mut series = Vec::new();
    let mut metrics = BTreeMap::new();
    metrics.insert("stochasticity".into(), k0);
    for case in cases {
        let label = case.label();
        let train = TrainSettings {
            n_loc: n_kicks - config.train.n_pre,
            period_loc: period_from_tau(case.tau),
            strength: case.strength,
            ..config.train.clone()
        };
        let trains = [train.two_stage(d1).build()?, train.two_stage(d2).build()?];
        let runs: Vec<EnsembleRun> = trains
            .par_iter()
            .map(|t| sim.run(t))
            .collect::<Result<_>>()?;
        let classical = classical_train_trace(
            config.transition.classical_trajectories,
            &sampling,
            &trains[0],
            config.seed,
        )?;

        let at = |r: &EnsembleRun, k: usize| r.trace.energy_at(k).expect("kick within trace");
        let (c1, c2) = (at(&runs[0], control_kick), at(&runs[1], control_kick));
        metrics.insert(
            format!("{label}_control_at_{control_kick}"),
            degree_of_control(c1, c2)?,
        );
        let (f1, f2) = (at(&runs[0], n_kicks), at(&runs[1], n_kicks));
        metrics.insert(format!("{label}_control_final"), degree_of_control(f1, f2)?);
        for (i, r) in runs.iter().enumerate() {
            let growth = at(r, n_kicks) / at(r, control_kick) - 1.0;
            metrics.insert(format!("{label}_delay_{}_growth", i + 1), growth);
        }
        let ce = classical.trace.energies();
        metrics.insert(
            format!("{label}_classical_growth"),
            ce[n_kicks] / ce[control_kick] - 1.0,
        );
        metrics.insert(format!("{label}_period_loc"), train.period_loc);

        for (i, r) in runs.into_iter().enumerate() {
            series.push(series_from_run(format!("{label}_delay_{}", i + 1), r));
        }
        series.push(Series {
            label: format!("{label}_classical"),
            trace: classical.trace,
            populations: None,
            m_resolved: Vec::new(),
        });
    }
    Ok(ExperimentResult {
        scenario: Scenario::Transition,
        series,
        tables: Vec::new(),
        metrics,
        provenance: provenance(config, &sim),
    })
}

/// Final energy after `n_kicks` equally spaced kicks (strength
/// `train.strength`) as a function of the period.
pub fn resonance_map(
    config: &ExperimentConfig,
    periods: &[f64],
    n_kicks: usize,
) -> Result<ExperimentResult> {
    let sim = Simulator::new(config)?;
    let strength = config.train.strength;
    let energies: Vec<(f64, f64)> = periods
        .par_iter()
        .map(|&period| sim.final_energy(&PulseTrain::periodic(n_kicks, period, strength)?))
        .collect::<Result<_>>()?;
    let rows = periods
        .iter()
        .zip(&energies)
        .map(|(p, (e, a))| vec![*p, tau_from_period(*p), *e, *a])
        .collect();
    let mut metrics = BTreeMap::new();
    metrics.insert("n_kicks".into(), n_kicks as f64);
    Ok(ExperimentResult {
        scenario: Scenario::ResonanceMap,
        series: Vec::new(),
        tables: vec![Table {
            label: "resonance_map".into(),
            columns: vec![
                "period".into(),
                "tau".into(),
                "final_energy_B".into(),
                "absorbed_B".into(),
            ],
            rows,
        }],
        metrics,
        provenance: provenance(config, &sim),
    })
}

/// Classical ensemble trace with the `[classical]` settings, sampled from the
/// configured initial condition.
pub fn run_classical(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let molecule = config.molecule.resolve()?;
    let sampling = match &config.initial {
        Some(init) => ClassicalSampling::from_levels(&init.level_weights())?,
        None => ClassicalSampling::from_ensemble(&boltzmann_ensemble(
            &molecule,
            config.temperature_k,
            config.ensemble.weight_cutoff,
        )?)?,
    };
    let c = &config.classical;
    let trace = classical_energy_trace(
        c.trajectories,
        &sampling,
        c.strength,
        c.tau,
        c.n_kicks,
        config.seed,
    )?;
    let rows = trace
        .trace
        .points()
        .iter()
        .zip(&trace.std_error)
        .map(|(p, se)| vec![p.pulse_index as f64, p.energy, *se])
        .collect();
    let mut metrics = BTreeMap::new();
    metrics.insert("stochasticity".into(), c.tau * c.strength);
    metrics.insert("trajectories".into(), c.trajectories as f64);
    let ensemble_members = match config.initial {
        Some(_) => 1,
        None => boltzmann_ensemble(
            &molecule,
            config.temperature_k,
            config.ensemble.weight_cutoff,
        )?
        .len(),
    };
    Ok(ExperimentResult {
        scenario: Scenario::Classical,
        series: vec![Series {
            label: "classical".into(),
            trace: trace.trace,
            populations: None,
            m_resolved: Vec::new(),
        }],
        tables: vec![Table {
            label: "classical_stats".into(),
            columns: vec![
                "pulse_index".into(),
                "mean_energy_B".into(),
                "std_error_B".into(),
            ],
            rows,
        }],
        metrics,
        provenance: Provenance {
            config: config.clone(),
            revival_period_s: molecule.revival_period_s(),
            molecule,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            ensemble_members,
        },
    })
}

/// Runs the scenario with the grids and cases taken from `config`.
pub fn run_scenario(scenario: Scenario, config: &ExperimentConfig) -> Result<ExperimentResult> {
    match scenario {
        Scenario::Simulate => run_control_experiment(config),
        Scenario::ScanDelay => scan_delay(config, &config.scan.delay.points()),
        Scenario::ScanPeriod => {
            let delays = config.two_delays()?;
            let grid = config.scan.optimize_delay.points();
            let opt = config.scan.optimize.then_some(grid.as_slice());
            scan_period_sensitivity(config, &config.scan.period_loc, delays, opt)
        }
        Scenario::Transition => quantum_classical_transition(
            config,
            &config.transition.cases,
            config.transition.n_kicks,
        ),
        Scenario::ResonanceMap => {
            resonance_map(config, &config.scan.period.points(), config.scan.n_kicks)
        }
        Scenario::Classical => run_classical(config),
    }
}

/// A δ-kick train of `n` kicks at period `period` starting at `start`.
pub fn uniform_train(n: usize, period: f64, strength: f64, start: f64) -> Result<PulseTrain> {
    PulseTrain::new(
        (0..n)
            .map(|k| PulseSpec::delta(start + k as f64 * period, strength))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            temperature_k: 5.0,
            ensemble: EnsembleSettings {
                weight_cutoff: 1e-3,
            },
            ..Default::default()
        }
    }

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn validation_names_keys() {
        let mut c = ExperimentConfig::default();
        c.train.period_loc = -0.2;
        assert!(
            matches!(c.validate(), Err(Error::Config { key, .. }) if key == "train.period_loc")
        );

        let mut c = ExperimentConfig::default();
        c.transition.cases[1].strength = 5.6;
        assert!(
            matches!(c.validate(), Err(Error::Config { key, .. }) if key == "transition.cases")
        );

        let c = ExperimentConfig {
            model: ModelSettings {
                delta_kick: false,
                fwhm: Some(0.01),
                dt: Some(0.005),
            },
            ..ExperimentConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "model.dt"));

        let c = ExperimentConfig {
            molecule: MoleculeRef::Name("Xe2".into()),
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "molecule"));
    }

    #[test]
    fn grid_points() {
        let g = Grid::range(0.2, 0.3, 0.001);
        let p = g.points();
        assert_eq!(p.len(), 101);
        assert!((p[100] - 0.3).abs() < 1e-12);
        assert_eq!(Grid::Values(vec![0.5]).points(), vec![0.5]);
    }

    #[test]
    fn control_requires_two_delays() {
        let mut c = small_config();
        c.train.delay = vec![0.243];
        assert!(
            matches!(run_control_experiment(&c), Err(Error::Config { key, .. }) if key == "train.delay")
        );
    }

    #[test]
    fn no_localizing_kicks_gives_identical_traces() {
        let mut c = small_config();
        c.train.strength_pre = Some(3.8);
        c.train.strength = 0.0;
        let r = run_control_experiment(&c).unwrap();
        let a = r.series("delay_1").unwrap().trace.energies();
        let b = r.series("delay_2").unwrap().trace.energies();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ensemble_run_populations_normalized() {
        let sim = Simulator::new(&small_config()).unwrap();
        let run = sim
            .run(&TrainSettings::default().two_stage(0.25).build().unwrap())
            .unwrap();
        let total: f64 = run.populations.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let m_total: f64 = run.m_resolved.iter().map(|l| l.population).sum();
        assert!((m_total - 1.0).abs() < 1e-12);
        assert!(run.populations.iter().all(|(j, _)| j % 2 == 1));
    }

    #[test]
    fn raw_amplitudes_match_basis_state() {
        let base = ExperimentConfig {
            initial: Some(InitialState::basis_state(3, 1)),
            ..small_config()
        };
        let raw = ExperimentConfig {
            initial: Some(InitialState {
                j: None,
                m: 1,
                amplitudes: vec![RawAmplitude {
                    j: 3,
                    re: 0.0,
                    im: -2.0,
                }],
            }),
            ..small_config()
        };
        let a = run_control_experiment(&base).unwrap();
        let b = run_control_experiment(&raw).unwrap();
        for (x, y) in a.series[0]
            .trace
            .energies()
            .iter()
            .zip(b.series[0].trace.energies())
        {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn raw_amplitudes_need_exactly_one_form() {
        let c = ExperimentConfig {
            initial: Some(InitialState {
                j: Some(1),
                m: 0,
                amplitudes: vec![RawAmplitude {
                    j: 1,
                    re: 1.0,
                    im: 0.0,
                }],
            }),
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "initial"));
    }

    #[test]
    fn member_errors_are_labelled() {
        let mut c = small_config();
        c.basis.j_max = 9;
        let err = run_control_experiment(&c).unwrap_err();
        assert!(
            matches!(err, Error::Member { ref source, .. } if matches!(**source, Error::TruncationLeak { .. })),
            "{err}"
        );
    }
}
