//! Classical cos²θ kicked rotor (planar), the classical limit of the
//! molecular kicked rotor.
//!
//! One period maps `l → l − P sin 2θ` (kick) and `θ → θ + τ l (mod π)` (free
//! rotation), with `l` in units of ħ, so that `E = B l²`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ensembles::ThermalEnsemble;
use crate::error::{Error, Result};
use crate::observables::EnergyTrace;
use crate::pulse::{PulseSpec, PulseTrain};
use crate::resonance::tau_from_period;

const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    theta: f64,
    pub l: f64,
}

impl ClassicalState {
    pub fn new(theta: f64, l: f64) -> Self {
        Self {
            theta: theta.rem_euclid(PI),
            l,
        }
    }

    /// Angle in `[0, π)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn energy(&self) -> f64 {
        self.l * self.l
    }
}

pub fn classical_kick(state: ClassicalState, strength: f64) -> ClassicalState {
    ClassicalState {
        theta: state.theta,
        l: state.l - strength * (2.0 * state.theta).sin(),
    }
}

pub fn classical_free(state: ClassicalState, tau: f64) -> ClassicalState {
    ClassicalState::new(state.theta + tau * state.l, state.l)
}

/// Initial angular-momentum distribution: `J` drawn from level weights,
/// `l = ±sqrt(J(J+1))` with a random sign.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSampling {
    levels: Vec<u32>,
    cumulative: Vec<f64>,
}

impl ClassicalSampling {
    pub fn from_levels(weights: &[(u32, f64)]) -> Result<Self> {
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if weights.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0))
            || (total.is_nan() || total <= 0.0)
        {
            return Err(Error::Domain(
                "sampling weights must be non-negative and not all zero".into(),
            ));
        }
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(weights.len());
        for (_, w) in weights {
            acc += w / total;
            cumulative.push(acc);
        }
        Ok(Self {
            levels: weights.iter().map(|(j, _)| *j).collect(),
            cumulative,
        })
    }

    /// Classical analog of a quantum ensemble.
    pub fn from_ensemble(ensemble: &ThermalEnsemble) -> Result<Self> {
        Self::from_levels(&ensemble.level_weights())
    }

    pub fn level(j: u32) -> Self {
        Self {
            levels: vec![j],
            cumulative: vec![1.0],
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> ClassicalState {
        let u: f64 = rng.random();
        let index = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.levels.len() - 1);
        let j = f64::from(self.levels[index]);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let theta = rng.random::<f64>() * PI;
        ClassicalState::new(theta, sign * (j * (j + 1.0)).sqrt())
    }
}

/// Generator for trajectory `index`: the master seed picks the key, the
/// trajectory index picks the ChaCha stream.
fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    states: Vec<ClassicalState>,
    rng_seed: u64,
}

impl ClassicalEnsemble {
    pub fn sample(size: usize, sampling: &ClassicalSampling, seed: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::Domain(
                "classical ensemble needs at least one trajectory".into(),
            ));
        }
        let states = (0..size)
            .map(|i| sampling.draw(&mut trajectory_rng(seed, i)))
            .collect();
        Ok(Self {
            states,
            rng_seed: seed,
        })
    }

    pub fn states(&self) -> &[ClassicalState] {
        &self.states
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn kick(&mut self, strength: f64) {
        self.states
            .iter_mut()
            .for_each(|s| *s = classical_kick(*s, strength));
    }

    pub fn free(&mut self, tau: f64) {
        self.states
            .iter_mut()
            .for_each(|s| *s = classical_free(*s, tau));
    }

    pub fn mean_energy(&self) -> f64 {
        self.states.iter().map(ClassicalState::energy).sum::<f64>() / self.states.len() as f64
    }

    pub fn mean_l(&self) -> f64 {
        self.states.iter().map(|s| s.l).sum::<f64>() / self.states.len() as f64
    }
}

/// Ensemble-mean energy trace with its standard error per point.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalTrace {
    pub trace: EnergyTrace,
    pub std_error: Vec<f64>,
    pub trajectories: usize,
    pub seed: u64,
}

/// Mean `l²` (units of B) after every pulse of `train`; free rotation between
/// pulses uses `τ = 2π Δt`. Pulse widths are ignored (impulsive kicks).
pub fn classical_train_trace(
    size: usize,
    sampling: &ClassicalSampling,
    train: &PulseTrain,
    seed: u64,
) -> Result<ClassicalTrace> {
    if size == 0 {
        return Err(Error::Domain(
            "classical ensemble needs at least one trajectory".into(),
        ));
    }
    let pulses = train.pulses();
    let points = pulses.len() + 1;
    let chunks = size.div_ceil(CHUNK);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sum = vec![0.0; points];
            let mut sum_sq = vec![0.0; points];
            for i in c * CHUNK..((c + 1) * CHUNK).min(size) {
                let mut s = sampling.draw(&mut trajectory_rng(seed, i));
                let mut record = |k: usize, s: &ClassicalState| {
                    let e = s.energy();
                    sum[k] += e;
                    sum_sq[k] += e * e;
                };
                record(0, &s);
                for (k, p) in pulses.iter().enumerate() {
                    if k > 0 {
                        s = classical_free(s, tau_from_period(p.time - pulses[k - 1].time));
                    }
                    s = classical_kick(s, p.strength);
                    record(k + 1, &s);
                }
            }
            (sum, sum_sq)
        })
        .collect();

    let mut sum = vec![0.0; points];
    let mut sum_sq = vec![0.0; points];
    for (s, q) in &partials {
        for k in 0..points {
            sum[k] += s[k];
            sum_sq[k] += q[k];
        }
    }
    let n = size as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_error = (0..points)
        .map(|k| {
            if size < 2 {
                return 0.0;
            }
            let var = ((sum_sq[k] - n * mean[k] * mean[k]) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
        .collect();
    let mut times = Vec::with_capacity(points);
    times.push(pulses.first().map_or(0.0, |p| p.time));
    times.extend(pulses.iter().map(|p| p.time));
    Ok(ClassicalTrace {
        trace: EnergyTrace::from_energies(&times, &mean)?,
        std_error,
        trajectories: size,
        seed,
    })
}

/// `n_kicks` kicks of strength `strength` separated by free rotation `tau`.
pub fn classical_energy_trace(
    size: usize,
    sampling: &ClassicalSampling,
    strength: f64,
    tau: f64,
    n_kicks: usize,
    seed: u64,
) -> Result<ClassicalTrace> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::Domain(format!(
            "tau must be non-negative, got {tau}"
        )));
    }
    let period = tau / (2.0 * PI);
    let train = PulseTrain::new(
        (0..n_kicks)
            .map(|k| PulseSpec::delta(k as f64 * period, strength))
            .collect(),
    )?;
    classical_train_trace(size, sampling, &train, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kick_examples() {
        let s = ClassicalState::new(0.0, 1.5);
        assert_eq!(classical_kick(s, 3.0).l, 1.5);
        let s = ClassicalState::new(PI / 2.0, 1.5);
        assert!((classical_kick(s, 3.0).l - 1.5).abs() < 1e-15);
        let s = ClassicalState::new(PI / 4.0, 0.0);
        assert!((classical_kick(s, 2.0).l + 2.0).abs() < 1e-15);
    }

    #[test]
    fn free_examples() {
        let s = ClassicalState::new(0.7, 0.0);
        assert_eq!(classical_free(s, 3.0), s);
        let s = ClassicalState::new(0.7, 4.0);
        assert_eq!(classical_free(s, 0.0), s);
        let s = classical_free(ClassicalState::new(0.1, 2.0), 0.5);
        assert!((s.theta() - 1.1).abs() < 1e-15);
        let s = classical_free(ClassicalState::new(3.0, 1.0), 1.0);
        assert!((s.theta() - (4.0 - PI)).abs() < 1e-15);
    }

    #[test]
    fn zero_strength_flat() {
        let sampling = ClassicalSampling::from_levels(&[(1, 0.5), (3, 0.5)]).unwrap();
        let t = classical_energy_trace(500, &sampling, 0.0, 1.0, 10, 3).unwrap();
        let e = t.trace.energies();
        assert!(e.iter().all(|x| *x == e[0]));
    }

    #[test]
    fn sampling_respects_levels() {
        let ens = ClassicalEnsemble::sample(200, &ClassicalSampling::level(3), 9).unwrap();
        assert!(ens
            .states()
            .iter()
            .all(|s| (s.l.abs() - 12f64.sqrt()).abs() < 1e-12));
        assert!(ens.states().iter().all(|s| (0.0..PI).contains(&s.theta())));
        assert!(ClassicalEnsemble::sample(0, &ClassicalSampling::level(3), 9).is_err());
    }

    #[test]
    fn trace_matches_ensemble_stepping() {
        let sampling = ClassicalSampling::from_levels(&[(1, 0.3), (3, 0.5), (5, 0.2)]).unwrap();
        let t = classical_energy_trace(300, &sampling, 2.5, 1.3, 6, 11).unwrap();
        let mut ens = ClassicalEnsemble::sample(300, &sampling, 11).unwrap();
        let mut manual = vec![ens.mean_energy()];
        for k in 0..6 {
            if k > 0 {
                ens.free(1.3);
            }
            ens.kick(2.5);
            manual.push(ens.mean_energy());
        }
        for (a, b) in t.trace.energies().iter().zip(&manual) {
            assert!((a - b).abs() < 1e-9 * b.max(1.0), "{a} vs {b}");
        }
    }
}
