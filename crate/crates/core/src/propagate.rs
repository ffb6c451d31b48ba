//! Time evolution of wave packets through pulse trains.
//!
//! A [`TrainPropagator`] precomputes every operator a train needs for one
//! basis, so an ensemble of initial states sharing `(m, parity)` reuses the
//! same diagonalization and kick matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::basis::{RotorBasis, WavePacket};
use crate::error::{Error, Result};
use crate::kick::{apply_diagonal, free_phases, Cos2Spectrum};
use crate::pulse::{PulseSpec, PulseTrain};

/// Default population threshold for the top two basis levels.
pub const DEFAULT_LEAK_THRESHOLD: f64 = 1e-6;

/// Gaussian envelopes are truncated at ±this many FWHM.
pub const ENVELOPE_HALF_WIDTH_FWHM: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observation {
    /// Initial state plus one snapshot after every pulse.
    EveryPulse,
    FinalOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub observe: Observation,
    pub leak_threshold: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            observe: Observation::EveryPulse,
            leak_threshold: DEFAULT_LEAK_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseModel {
    Delta,
    /// Split-step integration over each pulse envelope with step `dt`.
    Finite {
        dt: f64,
    },
}

/// State after `pulse_index` pulses (0 = initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub pulse_index: usize,
    pub time: f64,
    pub state: WavePacket,
}

pub type Trajectory = Vec<Snapshot>;

/// Normalized Gaussian intensity weights of the integration steps across
/// `[−3·fwhm, +3·fwhm]`. Returns the actual step and the weights (sum = 1).
pub fn envelope_fractions(fwhm: f64, dt: f64) -> Result<(f64, Vec<f64>)> {
    if !(fwhm.is_finite() && fwhm > 0.0) {
        return Err(Error::Domain(format!("fwhm must be positive, got {fwhm}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {dt}")));
    }
    let limit = fwhm / 4.0;
    if dt > limit {
        return Err(Error::StepTooCoarse { dt, limit });
    }
    let half = ENVELOPE_HALF_WIDTH_FWHM * fwhm;
    let steps = (2.0 * half / dt).ceil().max(1.0) as usize;
    let h = 2.0 * half / steps as f64;
    let sigma = fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    let cdf = |t: f64| 0.5 * (1.0 + libm::erf(t / (sigma * std::f64::consts::SQRT_2)));
    let mut fractions: Vec<f64> = (0..steps)
        .map(|k| {
            let a = -half + k as f64 * h;
            cdf(a + h) - cdf(a)
        })
        .collect();
    let total: f64 = fractions.iter().sum();
    fractions.iter_mut().for_each(|f| *f /= total);
    Ok((h, fractions))
}

/// Evolves amplitudes through one pulse window, referenced to the pulse
/// centre: the window is bracketed by `−3·fwhm` of free evolution on each
/// side, so the map reduces to the δ-kick as `fwhm → 0`.
fn apply_window(
    spectrum: &Cos2Spectrum,
    strength: f64,
    fwhm: f64,
    dt: f64,
    amplitudes: &mut DVector<Complex64>,
) -> Result<()> {
    let (h, fractions) = envelope_fractions(fwhm, dt)?;
    let basis = spectrum.basis();
    let back = free_phases(basis, -ENVELOPE_HALF_WIDTH_FWHM * fwhm);
    let half_step = free_phases(basis, h / 2.0);
    apply_diagonal(&back, amplitudes);
    for f in fractions {
        apply_diagonal(&half_step, amplitudes);
        spectrum.apply_exp_i(strength * f, amplitudes);
        apply_diagonal(&half_step, amplitudes);
    }
    apply_diagonal(&back, amplitudes);
    Ok(())
}

/// Dense matrix of the finite-pulse map for one pulse.
pub fn finite_pulse_operator(
    spectrum: &Cos2Spectrum,
    strength: f64,
    fwhm: f64,
    dt: f64,
) -> Result<DMatrix<Complex64>> {
    check_strength(strength)?;
    let n = spectrum.basis().len();
    let mut out = DMatrix::<Complex64>::identity(n, n);
    for mut column in out.column_iter_mut() {
        let mut v = column.clone_owned();
        apply_window(spectrum, strength, fwhm, dt, &mut v)?;
        column.copy_from(&v);
    }
    Ok(out)
}

/// One finite-width pulse applied to a state by time-ordered split steps.
/// The result is referenced to the pulse centre (see [`apply_window`]).
pub fn propagate_finite_pulse(
    state: &WavePacket,
    pulse: &PulseSpec,
    dt: f64,
) -> Result<WavePacket> {
    let fwhm = pulse
        .fwhm
        .ok_or_else(|| Error::Domain("propagate_finite_pulse needs a pulse with fwhm".into()))?;
    check_strength(pulse.strength)?;
    let spectrum = Cos2Spectrum::new(state.basis())?;
    let mut out = state.clone();
    apply_window(&spectrum, pulse.strength, fwhm, dt, out.amplitudes_mut())?;
    Ok(out)
}

fn check_strength(strength: f64) -> Result<()> {
    if !(strength.is_finite() && strength >= 0.0) {
        return Err(Error::Domain(format!(
            "kick strength must be finite and non-negative, got {strength}"
        )));
    }
    Ok(())
}

/// Precomputed operators for propagating states of one basis through one
/// train.
#[derive(Debug, Clone)]
pub struct TrainPropagator {
    basis: RotorBasis,
    times: Vec<f64>,
    operators: Vec<DMatrix<Complex64>>,
    pulse_operator: Vec<usize>,
    /// `gaps[k]` evolves from pulse `k−1` to pulse `k`; `gaps[0]` is unused.
    gaps: Vec<DVector<Complex64>>,
    leak_threshold: f64,
}

impl TrainPropagator {
    pub fn new(
        basis: &RotorBasis,
        train: &PulseTrain,
        model: PulseModel,
        leak_threshold: f64,
    ) -> Result<Self> {
        let spectrum = Cos2Spectrum::new(basis)?;
        Self::with_spectrum(&spectrum, train, model, leak_threshold)
    }

    pub fn with_spectrum(
        spectrum: &Cos2Spectrum,
        train: &PulseTrain,
        model: PulseModel,
        leak_threshold: f64,
    ) -> Result<Self> {
        let pulses = train.pulses();
        match model {
            PulseModel::Delta => {
                if let Some(index) = pulses.iter().position(|p| !p.is_delta()) {
                    return Err(Error::WrongModel { index });
                }
            }
            PulseModel::Finite { .. } => {
                if let Some(i) = pulses.iter().position(|p| p.is_delta()) {
                    return Err(Error::Domain(format!(
                        "pulse {i} has no fwhm but the finite-pulse model was requested"
                    )));
                }
                for (i, w) in pulses.windows(2).enumerate() {
                    let reach = ENVELOPE_HALF_WIDTH_FWHM
                        * (w[0].fwhm.unwrap_or(0.0) + w[1].fwhm.unwrap_or(0.0));
                    if w[1].time - w[0].time < reach {
                        return Err(Error::Domain(format!(
                            "envelopes of pulses {i} and {} overlap (gap {} < {reach})",
                            i + 1,
                            w[1].time - w[0].time
                        )));
                    }
                }
            }
        }

        let mut keys: Vec<(u64, Option<u64>)> = Vec::new();
        let mut operators = Vec::new();
        let mut pulse_operator = Vec::with_capacity(pulses.len());
        for p in pulses {
            let key = (p.strength.to_bits(), p.fwhm.map(f64::to_bits));
            let index = match keys.iter().position(|k| *k == key) {
                Some(i) => i,
                None => {
                    check_strength(p.strength)?;
                    let op = match (model, p.fwhm) {
                        (PulseModel::Finite { dt }, Some(w)) => {
                            finite_pulse_operator(spectrum, p.strength, w, dt)?
                        }
                        _ => spectrum.exp_i(p.strength),
                    };
                    keys.push(key);
                    operators.push(op);
                    operators.len() - 1
                }
            };
            pulse_operator.push(index);
        }

        let basis = spectrum.basis().clone();
        let times: Vec<f64> = pulses.iter().map(|p| p.time).collect();
        let mut gaps = Vec::with_capacity(times.len());
        for k in 0..times.len() {
            let dt = if k == 0 { 0.0 } else { times[k] - times[k - 1] };
            gaps.push(free_phases(&basis, dt));
        }
        Ok(Self {
            basis,
            times,
            operators,
            pulse_operator,
            gaps,
            leak_threshold,
        })
    }

    pub fn basis(&self) -> &RotorBasis {
        &self.basis
    }

    pub fn pulse_count(&self) -> usize {
        self.times.len()
    }

    /// Time label of snapshot `index` (0 = before the first pulse).
    pub fn snapshot_time(&self, index: usize) -> f64 {
        match index {
            0 => self.times.first().copied().unwrap_or(0.0),
            k => self.times[k - 1],
        }
    }

    /// Runs the train, calling `visit(pulse_index, time, state)` for the
    /// initial state and after every pulse. Returns the final state.
    pub fn evolve(
        &self,
        initial: &WavePacket,
        mut visit: impl FnMut(usize, f64, &WavePacket),
    ) -> Result<WavePacket> {
        if initial.basis() != &self.basis {
            return Err(Error::InvalidState(
                "state basis differs from the propagator basis".into(),
            ));
        }
        let mut state = initial.clone();
        visit(0, self.snapshot_time(0), &state);
        let top = self.basis.len().min(2);
        for k in 0..self.times.len() {
            if k > 0 {
                apply_diagonal(&self.gaps[k], state.amplitudes_mut());
            }
            let next = &self.operators[self.pulse_operator[k]] * state.amplitudes();
            *state.amplitudes_mut() = next;
            let leak = state.top_population(top);
            if leak > self.leak_threshold {
                return Err(Error::TruncationLeak {
                    pulse_index: k + 1,
                    population: leak,
                    threshold: self.leak_threshold,
                    j_max: self.basis.j_max(),
                });
            }
            visit(k + 1, self.times[k], &state);
        }
        Ok(state)
    }

    pub fn trajectory(&self, initial: &WavePacket, observe: Observation) -> Result<Trajectory> {
        let mut out = Vec::new();
        let last = self.times.len();
        self.evolve(initial, |pulse_index, time, state| {
            if observe == Observation::EveryPulse || pulse_index == last {
                out.push(Snapshot {
                    pulse_index,
                    time,
                    state: state.clone(),
                });
            }
        })?;
        Ok(out)
    }
}

/// Propagates through a train of δ-kicks.
pub fn propagate_delta_train(
    state: &WavePacket,
    train: &PulseTrain,
    options: &PropagationOptions,
) -> Result<Trajectory> {
    propagate_train(state, train, PulseModel::Delta, options)
}

pub fn propagate_train(
    state: &WavePacket,
    train: &PulseTrain,
    model: PulseModel,
    options: &PropagationOptions,
) -> Result<Trajectory> {
    TrainPropagator::new(state.basis(), train, model, options.leak_threshold)?
        .trajectory(state, options.observe)
}
