//! Molecular constants, nuclear-spin statistics and thermal initial
//! conditions.
//!
//! Level energies are `E_J = B J(J+1)` with `B` in cm⁻¹. The revival period
//! follows from `B` alone: `T_rev = 2πI/ħ = 1 / (2 c B)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light, cm/s.
pub const SPEED_OF_LIGHT_CM_S: f64 = 2.997_924_58e10;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
/// Second radiation constant hc/k_B, cm·K (CODATA 2018).
pub const HC_OVER_KB_CM_K: f64 = 1.438_776_877_503_933_8;
/// Reduced Planck constant, J·s.
pub const HBAR_J_S: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

pub const DEFAULT_WEIGHT_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeSpec {
    pub name: String,
    /// Rotational constant, cm⁻¹.
    pub b_cm: f64,
    pub spin_weight_even: f64,
    pub spin_weight_odd: f64,
    /// Polarizability anisotropy Δα as a polarizability volume, Å³.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarizability_anisotropy: Option<f64>,
}

impl MoleculeSpec {
    /// ¹⁶O₂: odd J only.
    pub fn oxygen() -> Self {
        Self {
            name: "O2".into(),
            b_cm: 1.4377,
            spin_weight_even: 0.0,
            spin_weight_odd: 1.0,
            polarizability_anisotropy: Some(1.1),
        }
    }

    /// ¹⁴N₂: even:odd = 2:1.
    pub fn nitrogen() -> Self {
        Self {
            name: "N2".into(),
            b_cm: 1.9896,
            spin_weight_even: 2.0,
            spin_weight_odd: 1.0,
            polarizability_anisotropy: None,
        }
    }

    pub fn catalog() -> Vec<MoleculeSpec> {
        vec![Self::oxygen(), Self::nitrogen()]
    }

    pub fn lookup(name: &str) -> Option<MoleculeSpec> {
        Self::catalog()
            .into_iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b_cm.is_finite() && self.b_cm > 0.0) {
            return Err(Error::Domain(format!(
                "{}: rotational constant must be positive, got {}",
                self.name, self.b_cm
            )));
        }
        let w = [self.spin_weight_even, self.spin_weight_odd];
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || w.iter().all(|x| *x == 0.0) {
            return Err(Error::Domain(format!(
                "{}: spin weights must be non-negative with at least one positive",
                self.name
            )));
        }
        if let Some(a) = self.polarizability_anisotropy {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::Domain(format!(
                    "{}: polarizability anisotropy must be non-negative, got {a}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn spin_weight(&self, j: u32) -> f64 {
        if j.is_multiple_of(2) {
            self.spin_weight_even
        } else {
            self.spin_weight_odd
        }
    }

    pub fn revival_period_s(&self) -> f64 {
        1.0 / (2.0 * SPEED_OF_LIGHT_CM_S * self.b_cm)
    }

    /// Converts a duration in seconds to units of the revival period.
    pub fn to_revivals(&self, seconds: f64) -> f64 {
        seconds / self.revival_period_s()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub weight: f64,
    pub j0: u32,
    pub m0: i32,
}

/// Weighted pure initial states `|J₀, m₀>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnsemble {
    members: Vec<Member>,
    temperature: f64,
}

impl ThermalEnsemble {
    /// Validates non-negative weights summing to one within 1e-12.
    pub fn new(members: Vec<Member>, temperature: f64) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::DegenerateEnsemble("no members".into()));
        }
        if let Some(m) = members
            .iter()
            .find(|m| !(m.weight.is_finite() && m.weight >= 0.0) || m.m0.unsigned_abs() > m.j0)
        {
            return Err(Error::Domain(format!("invalid member {m:?}")));
        }
        let total: f64 = members.iter().map(|m| m.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "member weights sum to {total}, not 1"
            )));
        }
        Ok(Self {
            members,
            temperature,
        })
    }

    /// A single pure initial state.
    pub fn pure(j0: u32, m0: i32) -> Result<Self> {
        Self::new(
            vec![Member {
                weight: 1.0,
                j0,
                m0,
            }],
            0.0,
        )
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn max_j(&self) -> u32 {
        self.members.iter().map(|m| m.j0).max().unwrap_or(0)
    }

    /// Weight per J level, summed over m.
    pub fn level_weights(&self) -> Vec<(u32, f64)> {
        let mut levels: BTreeMap<u32, f64> = BTreeMap::new();
        for m in self.sorted_members() {
            *levels.entry(m.j0).or_default() += m.weight;
        }
        levels.into_iter().collect()
    }

    /// `−Σ w_J ln w_J` of the J distribution.
    pub fn level_entropy(&self) -> f64 {
        self.level_weights()
            .iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|(_, w)| -w * w.ln())
            .sum()
    }

    pub fn most_populated_level(&self) -> u32 {
        self.level_weights()
            .into_iter()
            .fold((0, f64::NEG_INFINITY), |best, (j, w)| {
                if w > best.1 {
                    (j, w)
                } else {
                    best
                }
            })
            .0
    }

    /// `<J(J+1)>` of the ensemble, in units of B.
    pub fn mean_energy(&self) -> f64 {
        self.sorted_members()
            .iter()
            .map(|m| m.weight * f64::from(m.j0) * (f64::from(m.j0) + 1.0))
            .sum()
    }

    /// Members ordered by `(J₀, m₀)`, the fixed summation order.
    pub fn sorted_members(&self) -> Vec<Member> {
        let mut sorted = self.members.clone();
        sorted.sort_by_key(|m| (m.j0, m.m0));
        sorted
    }
}

/// Boltzmann distribution over rotational levels with nuclear-spin weights,
/// `w_J ∝ g_J (2J+1) exp(−B J(J+1) hc / k_B T)`. The high-J tail is dropped
/// while the discarded weight stays below `weight_cutoff`, then the rest is
/// renormalized and split equally over `m ∈ [−J, J]`.
pub fn boltzmann_ensemble(
    molecule: &MoleculeSpec,
    temperature: f64,
    weight_cutoff: f64,
) -> Result<ThermalEnsemble> {
    molecule.validate()?;
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be non-negative, got {temperature} K"
        )));
    }
    if !(weight_cutoff > 0.0 && weight_cutoff < 1.0) {
        return Err(Error::Domain(format!(
            "weight cutoff must lie in (0, 1), got {weight_cutoff}"
        )));
    }

    let j_min = (0..2u32)
        .find(|&j| molecule.spin_weight(j) > 0.0)
        .ok_or_else(|| Error::DegenerateEnsemble("all spin weights are zero".into()))?;
    let level = |j: u32| f64::from(j) * (f64::from(j) + 1.0);

    let mut weights: Vec<(u32, f64)> = Vec::new();
    if temperature == 0.0 {
        weights.push((j_min, 1.0));
    } else {
        let beta = molecule.b_cm * HC_OVER_KB_CM_K / temperature;
        let mut j = j_min;
        loop {
            let exponent = beta * (level(j) - level(j_min));
            if exponent > 745.0 {
                break;
            }
            let w = molecule.spin_weight(j) * f64::from(2 * j + 1) * (-exponent).exp();
            if w > 0.0 {
                weights.push((j, w));
            }
            j += 1;
            if j > 1_000_000 {
                return Err(Error::DegenerateEnsemble(
                    "temperature too high for a finite level table".into(),
                ));
            }
        }
    }
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::DegenerateEnsemble(format!(
            "all level weights vanish at {temperature} K"
        )));
    }
    weights.iter_mut().for_each(|(_, w)| *w /= total);

    let mut discarded = 0.0;
    while weights.len() > 1 {
        let tail = weights.last().expect("non-empty").1;
        if discarded + tail >= weight_cutoff {
            break;
        }
        discarded += tail;
        weights.pop();
    }
    let kept: f64 = weights.iter().map(|(_, w)| w).sum();

    let mut members = Vec::new();
    for (j, w) in weights {
        let per_m = w / kept / f64::from(2 * j + 1);
        let j_signed = j as i32;
        members.extend((-j_signed..=j_signed).map(|m0| Member {
            weight: per_m,
            j0: j,
            m0,
        }));
    }
    // Renormalize once more so the member sum is 1 to rounding.
    let sum: f64 = members.iter().map(|m| m.weight).sum();
    members.iter_mut().for_each(|m| m.weight /= sum);
    ThermalEnsemble::new(members, temperature)
}

/// Dimensionless kick strength `P = Δα/(4ħ) ∫ℰ²(t) dt`.
///
/// `polarizability_anisotropy` is a polarizability volume in Å³, converted to
/// SI as `4π ε₀ · Δα · 1e-30` C·m²/V; `field_squared_integral` is `∫ℰ² dt`
/// of the field envelope in V²·s/m².
pub fn kick_strength_from_pulse(
    polarizability_anisotropy: f64,
    field_squared_integral: f64,
) -> Result<f64> {
    for (name, v) in [
        ("polarizability anisotropy", polarizability_anisotropy),
        ("field-squared integral", field_squared_integral),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Domain(format!(
                "{name} must be non-negative, got {v}"
            )));
        }
    }
    let alpha_si = 4.0 * PI * EPSILON_0 * polarizability_anisotropy * 1e-30;
    Ok(alpha_si / (4.0 * HBAR_J_S) * field_squared_integral)
}

/// `∫ℰ² dt` for a Gaussian intensity profile with the given peak intensity
/// (W/cm²) and intensity FWHM (s), using `I = c ε₀ ℰ² / 2`.
pub fn gaussian_field_squared_integral(peak_intensity_w_cm2: f64, fwhm_s: f64) -> f64 {
    let peak_w_m2 = peak_intensity_w_cm2 * 1e4;
    let fluence = peak_w_m2 * fwhm_s * (PI / (4.0 * std::f64::consts::LN_2)).sqrt();
    2.0 * fluence / (SPEED_OF_LIGHT_M_S * EPSILON_0)
}

/// Weighted sum of per-member observable vectors, accumulated in `(J₀, m₀)`
/// order so the result does not depend on member order.
pub fn ensemble_average(
    ensemble: &ThermalEnsemble,
    results: &BTreeMap<(u32, i32), Vec<f64>>,
) -> Result<Vec<f64>> {
    let mut acc: Option<Vec<f64>> = None;
    for m in ensemble.sorted_members() {
        let r = results
            .get(&(m.j0, m.m0))
            .ok_or(Error::IncompleteEnsemble { j0: m.j0, m0: m.m0 })?;
        let sum = acc.get_or_insert_with(|| vec![0.0; r.len()]);
        if sum.len() != r.len() {
            return Err(Error::Domain(format!(
                "member (J0 = {}, m0 = {}) has {} observables, expected {}",
                m.j0,
                m.m0,
                r.len(),
                sum.len()
            )));
        }
        for (s, x) in sum.iter_mut().zip(r) {
            *s += m.weight * x;
        }
    }
    acc.ok_or_else(|| Error::DegenerateEnsemble("no members".into()))
}
