//! Unitary building blocks: the impulsive laser kick `exp(+i P cos²θ)` and
//! free rotation `exp(−i π J(J+1) t)` with time in units of the revival period.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::basis::{Parity, RotorBasis, WavePacket};
use crate::coupling::cos2_matrix;
use crate::error::{Error, Result};

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// One parity sector of the cos²θ matrix, diagonalized.
#[derive(Debug, Clone)]
struct SectorEigen {
    /// Positions of the sector's levels inside the full basis.
    indices: Vec<usize>,
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

/// Eigendecomposition of cos²θ over a basis, block by block.
///
/// A `Both`-parity basis is split into its even and odd sectors before
/// diagonalizing so that degenerate eigenvalues across sectors cannot mix
/// them; operators built from it have exact zeros between sectors.
#[derive(Debug, Clone)]
pub struct Cos2Spectrum {
    basis: RotorBasis,
    sectors: Vec<SectorEigen>,
}

impl Cos2Spectrum {
    pub fn new(basis: &RotorBasis) -> Result<Self> {
        let full = cos2_matrix(basis);
        let js = basis.j_values();
        let sector_parities: &[Parity] = match basis.parity() {
            Parity::Both => &[Parity::Even, Parity::Odd],
            Parity::Even => &[Parity::Even],
            Parity::Odd => &[Parity::Odd],
        };
        let mut sectors = Vec::with_capacity(sector_parities.len());
        for &parity in sector_parities {
            let indices: Vec<usize> = (0..js.len()).filter(|&i| parity.admits(js[i])).collect();
            if indices.is_empty() {
                continue;
            }
            let block = full.select_rows(&indices).select_columns(&indices);
            let dim = indices.len();
            let eig =
                SymmetricEigen::try_new(block, EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
                    Error::Numerical {
                        m: basis.m(),
                        dim,
                        detail: format!(
                            "no convergence within {EIGEN_MAX_ITER} sweeps ({parity:?} sector)"
                        ),
                    }
                })?;
            if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical {
                    m: basis.m(),
                    dim,
                    detail: "non-finite eigenvalue".into(),
                });
            }
            sectors.push(SectorEigen {
                indices,
                values: eig.eigenvalues,
                vectors: eig.eigenvectors,
            });
        }
        Ok(Self {
            basis: basis.clone(),
            sectors,
        })
    }

    pub fn basis(&self) -> &RotorBasis {
        &self.basis
    }

    /// Dense `exp(i s cos²θ)`.
    pub fn exp_i(&self, s: f64) -> DMatrix<Complex64> {
        let n = self.basis.len();
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for sector in &self.sectors {
            let phases: Vec<Complex64> = sector
                .values
                .iter()
                .map(|&v| Complex64::from_polar(1.0, s * v))
                .collect();
            let v = &sector.vectors;
            let dim = sector.indices.len();
            for (r, &row) in sector.indices.iter().enumerate() {
                for (c, &col) in sector.indices.iter().enumerate() {
                    let mut acc = Complex64::default();
                    for k in 0..dim {
                        acc += phases[k] * (v[(r, k)] * v[(c, k)]);
                    }
                    out[(row, col)] = acc;
                }
            }
        }
        out
    }

    /// Applies `exp(i s cos²θ)` to amplitudes in place without forming the
    /// dense operator.
    pub fn apply_exp_i(&self, s: f64, amplitudes: &mut DVector<Complex64>) {
        for sector in &self.sectors {
            let v = &sector.vectors;
            let dim = sector.indices.len();
            let mut projected = vec![Complex64::default(); dim];
            for (k, slot) in projected.iter_mut().enumerate() {
                let mut acc = Complex64::default();
                for (r, &row) in sector.indices.iter().enumerate() {
                    acc += amplitudes[row] * v[(r, k)];
                }
                *slot = acc * Complex64::from_polar(1.0, s * sector.values[k]);
            }
            for (r, &row) in sector.indices.iter().enumerate() {
                let mut acc = Complex64::default();
                for (k, p) in projected.iter().enumerate() {
                    acc += *p * v[(r, k)];
                }
                amplitudes[row] = acc;
            }
        }
    }
}

/// `exp(+i P cos²θ)` over a basis. The plus sign follows from the attractive
/// `−ħP cos²θ` interaction.
#[derive(Debug, Clone)]
pub struct KickOperator {
    basis: RotorBasis,
    strength: f64,
    matrix: DMatrix<Complex64>,
}

impl KickOperator {
    pub fn from_spectrum(spectrum: &Cos2Spectrum, strength: f64) -> Result<Self> {
        check_strength(strength)?;
        Ok(Self {
            basis: spectrum.basis().clone(),
            strength,
            matrix: spectrum.exp_i(strength),
        })
    }

    pub fn basis(&self) -> &RotorBasis {
        &self.basis
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn apply(&self, state: &mut WavePacket) {
        debug_assert_eq!(state.basis(), &self.basis);
        let next = &self.matrix * state.amplitudes();
        *state.amplitudes_mut() = next;
    }

    /// Largest entry of `|U†U − 1|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.matrix.nrows();
        let product = self.matrix.adjoint() * &self.matrix;
        let identity = DMatrix::<Complex64>::identity(n, n);
        (product - identity)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Builds `exp(+i P cos²θ)` by diagonalizing cos²θ over `basis`.
pub fn kick_operator(basis: &RotorBasis, strength: f64) -> Result<KickOperator> {
    check_strength(strength)?;
    KickOperator::from_spectrum(&Cos2Spectrum::new(basis)?, strength)
}

fn check_strength(strength: f64) -> Result<()> {
    if !(strength.is_finite() && strength >= 0.0) {
        return Err(Error::Domain(format!(
            "kick strength must be finite and non-negative, got {strength}"
        )));
    }
    Ok(())
}

/// Phase `exp(−i π J(J+1) dt)` for one level, `dt` in units of T_rev.
///
/// `J(J+1)·dt` is reduced modulo 2 before scaling by π so whole revivals are
/// exact identities.
pub fn free_phase(j: u32, dt: f64) -> Complex64 {
    let jj = f64::from(j) * (f64::from(j) + 1.0);
    let turns = (jj * dt).rem_euclid(2.0);
    Complex64::from_polar(1.0, -PI * turns)
}

/// Diagonal of the free-rotation propagator over `dt` (negative allowed).
pub fn free_phases(basis: &RotorBasis, dt: f64) -> DVector<Complex64> {
    DVector::from_iterator(
        basis.len(),
        basis.j_values().iter().map(|&j| free_phase(j, dt)),
    )
}

pub(crate) fn apply_diagonal(phases: &DVector<Complex64>, amplitudes: &mut DVector<Complex64>) {
    amplitudes.component_mul_assign(phases);
}

/// Free rotation of a state by `dt` revival periods.
pub fn free_evolve(state: &mut WavePacket, dt: f64) {
    let phases = free_phases(state.basis(), dt);
    apply_diagonal(&phases, state.amplitudes_mut());
}
