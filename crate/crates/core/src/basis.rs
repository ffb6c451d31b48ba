//! Truncated angular-momentum bases and wave packets over them.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the L2 norm of a wave packet.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Which rotational levels a basis admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
    Both,
}

impl Parity {
    pub fn admits(self, j: u32) -> bool {
        match self {
            Parity::Even => j.is_multiple_of(2),
            Parity::Odd => j % 2 == 1,
            Parity::Both => true,
        }
    }

    /// The single-parity sector containing `j`.
    pub fn of(j: u32) -> Parity {
        if j.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Rotational levels `|J, m>` for one fixed `m`, filtered by parity and
/// truncated at `j_max` (inclusive).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RotorBasis {
    j_max: u32,
    m: i32,
    parity: Parity,
    j_values: Vec<u32>,
}

impl RotorBasis {
    pub fn new(j_max: u32, parity: Parity, m: i32) -> Result<Self> {
        let m_abs = m.unsigned_abs();
        if j_max < m_abs {
            return Err(Error::InvalidBasis(format!(
                "j_max = {j_max} is below |m| = {m_abs}"
            )));
        }
        let j_values: Vec<u32> = (m_abs..=j_max).filter(|&j| parity.admits(j)).collect();
        if j_values.is_empty() {
            return Err(Error::InvalidBasis(format!(
                "no {parity:?} levels between |m| = {m_abs} and j_max = {j_max}"
            )));
        }
        Ok(Self {
            j_max,
            m,
            parity,
            j_values,
        })
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn j_values(&self) -> &[u32] {
        &self.j_values
    }

    pub fn len(&self) -> usize {
        self.j_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.j_values.is_empty()
    }

    pub fn index_of(&self, j: u32) -> Option<usize> {
        self.j_values.binary_search(&j).ok()
    }

    /// Positions of the highest `count` levels, used by the truncation monitor.
    pub fn top_indices(&self, count: usize) -> std::ops::Range<usize> {
        self.len().saturating_sub(count)..self.len()
    }
}

/// Builds the basis of all levels of the requested parity with `|m| <= J <= j_max`.
pub fn build_basis(j_max: u32, parity: Parity, m: i32) -> Result<RotorBasis> {
    RotorBasis::new(j_max, parity, m)
}

/// A normalized state over a [`RotorBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    basis: RotorBasis,
    amplitudes: DVector<Complex64>,
}

impl WavePacket {
    /// The pure level `|j, m>` with `m` taken from the basis.
    pub fn basis_state(basis: RotorBasis, j: u32) -> Result<Self> {
        let index = basis.index_of(j).ok_or_else(|| {
            Error::InvalidState(format!(
                "J = {j} is not in the basis (m = {}, {:?}, j_max = {})",
                basis.m(),
                basis.parity(),
                basis.j_max()
            ))
        })?;
        let mut amplitudes = DVector::zeros(basis.len());
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    /// Wraps amplitudes that are already normalized.
    pub fn from_amplitudes(basis: RotorBasis, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::InvalidState(format!(
                "{} amplitudes for a basis of {} levels",
                amplitudes.len(),
                basis.len()
            )));
        }
        let amplitudes = DVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "norm {norm} differs from 1 by more than {NORM_TOLERANCE:e}"
            )));
        }
        Ok(Self { basis, amplitudes })
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalized(basis: RotorBasis, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::InvalidState(format!(
                "{} amplitudes for a basis of {} levels",
                amplitudes.len(),
                basis.len()
            )));
        }
        let mut amplitudes = DVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState(format!(
                "cannot normalize, norm = {norm}"
            )));
        }
        amplitudes.unscale_mut(norm);
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &RotorBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<Complex64> {
        &mut self.amplitudes
    }

    pub fn amplitude(&self, j: u32) -> Option<Complex64> {
        self.basis.index_of(j).map(|i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `(J, |c_J|^2)` in basis order.
    pub fn level_populations(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.basis
            .j_values
            .iter()
            .zip(self.amplitudes.iter())
            .map(|(&j, c)| (j, c.norm_sqr()))
    }

    /// `<J(J+1)>`, the rotational energy in units of B.
    pub fn energy(&self) -> f64 {
        self.level_populations()
            .map(|(j, p)| (j as f64) * (j as f64 + 1.0) * p)
            .sum()
    }

    /// Population in the highest `count` levels of the basis.
    pub fn top_population(&self, count: usize) -> f64 {
        self.basis
            .top_indices(count)
            .map(|i| self.amplitudes[i].norm_sqr())
            .sum()
    }

    /// Multiplies every amplitude by `exp(i phase)`.
    pub fn with_global_phase(mut self, phase: f64) -> Self {
        let factor = Complex64::from_polar(1.0, phase);
        self.amplitudes.iter_mut().for_each(|c| *c *= factor);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_state_basis() {
        let b = build_basis(0, Parity::Both, 0).unwrap();
        assert_eq!(b.j_values(), &[0]);
    }

    #[test]
    fn parity_filter() {
        let b = build_basis(5, Parity::Odd, 0).unwrap();
        assert_eq!(b.j_values(), &[1, 3, 5]);
        let b = build_basis(6, Parity::Even, -2).unwrap();
        assert_eq!(b.j_values(), &[2, 4, 6]);
    }

    #[test]
    fn m_cutoff() {
        let b = build_basis(5, Parity::Both, 3).unwrap();
        assert_eq!(b.j_values(), &[3, 4, 5]);
    }

    #[test]
    fn invalid_bases() {
        assert!(matches!(
            build_basis(2, Parity::Both, 3),
            Err(Error::InvalidBasis(_))
        ));
        // only J = 3 would satisfy |m| <= J <= 3, and it is odd
        assert!(matches!(
            build_basis(3, Parity::Even, 3),
            Err(Error::InvalidBasis(_))
        ));
    }

    #[test]
    fn wave_packet_validation() {
        let b = build_basis(5, Parity::Odd, 0).unwrap();
        assert!(WavePacket::basis_state(b.clone(), 2).is_err());
        let amps = vec![Complex64::new(1.0, 0.0); 3];
        assert!(WavePacket::from_amplitudes(b.clone(), amps.clone()).is_err());
        let psi = WavePacket::normalized(b.clone(), amps).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-15);
        assert!(WavePacket::normalized(b.clone(), vec![Complex64::default(); 3]).is_err());
        assert!(WavePacket::from_amplitudes(b, vec![Complex64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn energy_of_levels() {
        let b = build_basis(3, Parity::Odd, 0).unwrap();
        let psi = WavePacket::basis_state(b.clone(), 3).unwrap();
        assert_eq!(psi.energy(), 12.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi =
            WavePacket::from_amplitudes(b, vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)])
                .unwrap();
        assert!((psi.energy() - 7.0).abs() < 1e-12);
    }
}
