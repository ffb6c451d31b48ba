//! Measured quantities: level populations, rotational energy, the Raman
//! sideband model `I_J ∝ P_J²`, localization width and degree of control.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::basis::WavePacket;
use crate::error::{Error, Result};

/// Detection floor on retrieved populations.
pub const DEFAULT_NOISE_FLOOR: f64 = 5e-3;

const POPULATION_TOLERANCE: f64 = 1e-10;

/// `P_J`, summing to one.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PopulationDistribution {
    entries: BTreeMap<u32, f64>,
}

impl PopulationDistribution {
    pub fn new(entries: BTreeMap<u32, f64>) -> Result<Self> {
        if entries.values().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Domain(
                "populations must be finite and non-negative".into(),
            ));
        }
        let total: f64 = entries.values().sum();
        if (total - 1.0).abs() > POPULATION_TOLERANCE {
            return Err(Error::Domain(format!("populations sum to {total}, not 1")));
        }
        Ok(Self { entries })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(entries: BTreeMap<u32, f64>) -> Result<Self> {
        if entries.values().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Domain(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = entries.values().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::DegenerateEnsemble("all weights are zero".into()));
        }
        Ok(Self {
            entries: entries.into_iter().map(|(j, p)| (j, p / total)).collect(),
        })
    }

    pub fn entries(&self) -> &BTreeMap<u32, f64> {
        &self.entries
    }

    pub fn get(&self, j: u32) -> f64 {
        self.entries.get(&j).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().map(|(&j, &p)| (j, p))
    }

    /// Total population in levels with `J > j`.
    pub fn population_above(&self, j: u32) -> f64 {
        self.entries.range(j + 1..).map(|(_, p)| p).sum()
    }

    /// Level with the largest population (lowest J on ties).
    pub fn peak(&self) -> Option<u32> {
        self.iter()
            .fold(None, |best: Option<(u32, f64)>, (j, p)| match best {
                Some((_, bp)) if bp >= p => best,
                _ => Some((j, p)),
            })
            .map(|(j, _)| j)
    }

    /// Drops levels below `floor` and renormalizes, emulating a detection
    /// floor on retrieved populations.
    pub fn above_floor(&self, floor: f64) -> Result<Self> {
        Self::from_weights(
            self.entries
                .iter()
                .map(|(&j, &p)| (j, if p >= floor { p } else { 0.0 }))
                .collect(),
        )
    }
}

/// `P_J = |c_J|²`.
pub fn populations(state: &WavePacket) -> PopulationDistribution {
    PopulationDistribution {
        entries: state.level_populations().collect(),
    }
}

/// `Σ J(J+1) P_J`, in units of B.
pub fn rotational_energy(pop: &PopulationDistribution) -> f64 {
    pop.iter()
        .map(|(j, p)| f64::from(j) * (f64::from(j) + 1.0) * p)
        .sum()
}

pub fn absorbed_energy(pop: &PopulationDistribution, initial_energy: f64) -> f64 {
    rotational_energy(pop) - initial_energy
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPoint {
    pub pulse_index: usize,
    /// Units of T_rev.
    pub time: f64,
    /// Units of B.
    pub energy: f64,
    /// `energy` minus the energy at index 0.
    pub absorbed: f64,
}

/// Energy after each pulse; index 0 is the initial state.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyTrace {
    points: Vec<EnergyPoint>,
}

impl EnergyTrace {
    /// Builds a trace with indices `0..energies.len()`.
    pub fn from_energies(times: &[f64], energies: &[f64]) -> Result<Self> {
        if times.len() != energies.len() {
            return Err(Error::Domain(format!(
                "{} times for {} energies",
                times.len(),
                energies.len()
            )));
        }
        let base = energies.first().copied().unwrap_or(0.0);
        Ok(Self {
            points: times
                .iter()
                .zip(energies)
                .enumerate()
                .map(|(pulse_index, (&time, &energy))| EnergyPoint {
                    pulse_index,
                    time,
                    energy,
                    absorbed: energy - base,
                })
                .collect(),
        })
    }

    pub fn points(&self) -> &[EnergyPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.energy).collect()
    }

    pub fn absorbed(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.absorbed).collect()
    }

    pub fn energy_at(&self, pulse_index: usize) -> Option<f64> {
        self.points.get(pulse_index).map(|p| p.energy)
    }

    pub fn final_energy(&self) -> Option<f64> {
        self.points.last().map(|p| p.energy)
    }
}

/// Relative Raman line intensities, normalized to a maximum of 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamanSpectrum {
    intensities: BTreeMap<u32, f64>,
}

impl RamanSpectrum {
    pub fn from_intensities(intensities: BTreeMap<u32, f64>) -> Result<Self> {
        if intensities.values().any(|i| !i.is_finite() || *i < 0.0) {
            return Err(Error::Domain(
                "Raman intensities must be non-negative".into(),
            ));
        }
        let max = intensities.values().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return Err(Error::DegenerateEnsemble(
                "all Raman intensities are zero".into(),
            ));
        }
        Ok(Self {
            intensities: intensities.into_iter().map(|(j, i)| (j, i / max)).collect(),
        })
    }

    pub fn intensities(&self) -> &BTreeMap<u32, f64> {
        &self.intensities
    }

    pub fn get(&self, j: u32) -> f64 {
        self.intensities.get(&j).copied().unwrap_or(0.0)
    }
}

/// `I_J ∝ P_J²`.
pub fn raman_forward(pop: &PopulationDistribution) -> Result<RamanSpectrum> {
    RamanSpectrum::from_intensities(pop.iter().map(|(j, p)| (j, p * p)).collect())
}

/// `P_J ∝ √I_J`, renormalized.
pub fn retrieve_populations(spectrum: &RamanSpectrum) -> Result<PopulationDistribution> {
    PopulationDistribution::from_weights(
        spectrum
            .intensities
            .iter()
            .map(|(&j, &i)| (j, i.sqrt()))
            .collect(),
    )
}

/// `(E1 − E2) / ((E1 + E2) / 2)`.
pub fn degree_of_control(e1: f64, e2: f64) -> Result<f64> {
    let mean = (e1 + e2) / 2.0;
    if mean.is_nan() || mean <= 0.0 {
        return Err(Error::Domain(format!(
            "degree of control needs E1 + E2 > 0 (E1 = {e1}, E2 = {e2})"
        )));
    }
    Ok((e1 - e2) / mean)
}

/// `1 / Σ P_J²`.
pub fn participation_ratio(pop: &PopulationDistribution) -> f64 {
    1.0 / pop.iter().map(|(_, p)| p * p).sum::<f64>()
}

fn tail_slope(values: &[f64], start: usize) -> f64 {
    let ys = &values[start..];
    let n = ys.len() as f64;
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// First pulse index from which every least-squares tail slope stays within
/// `slope_tolerance` times the initial slope `(E₃ − E₀) / 3`.
///
/// Returns `None` for traces shorter than four points or when the energy
/// never stops growing.
pub fn break_time_estimate(trace: &EnergyTrace, slope_tolerance: f64) -> Option<usize> {
    let e = trace.energies();
    if e.len() < 4 {
        return None;
    }
    let limit = slope_tolerance * ((e[3] - e[0]) / 3.0).abs();
    let last_start = e.len() - 2;
    let ok: Vec<bool> = (0..=last_start)
        .map(|k| tail_slope(&e, k).abs() <= limit)
        .collect();
    // first index from which all later tail starts pass
    let mut candidate = None;
    for k in (0..=last_start).rev() {
        if ok[k] {
            candidate = Some(k);
        } else {
            break;
        }
    }
    candidate
}
