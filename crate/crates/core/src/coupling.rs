//! Matrix elements of cos²θ between rotor levels of equal m.
//!
//! Writing cos²θ = 1/3 + (2/3) P₂(cos θ), the diagonal follows from the
//! standard P₂ expectation value and the only other non-zero elements couple
//! J to J ± 2:
//!
//! ```text
//! <J,m|cos²θ|J,m>     = 1/3 + 2/3 · (J(J+1) − 3m²) / ((2J−1)(2J+3))
//! <J+2,m|cos²θ|J,m>   = sqrt(((J+1)² − m²)((J+2)² − m²)) / ((2J+3) sqrt((2J+1)(2J+5)))
//! ```

use nalgebra::DMatrix;

use crate::basis::RotorBasis;

/// `<j_row, m| cos²θ |j_col, m>`.
pub fn cos2_element(j_row: u32, j_col: u32, m: i32) -> f64 {
    let m2 = f64::from(m) * f64::from(m);
    if j_row == j_col {
        let j = f64::from(j_row);
        return 1.0 / 3.0
            + 2.0 / 3.0 * (j * (j + 1.0) - 3.0 * m2) / ((2.0 * j - 1.0) * (2.0 * j + 3.0));
    }
    let (lo, hi) = if j_row < j_col {
        (j_row, j_col)
    } else {
        (j_col, j_row)
    };
    if hi - lo != 2 || lo < m.unsigned_abs() {
        return 0.0;
    }
    let j = f64::from(lo);
    (((j + 1.0).powi(2) - m2) * ((j + 2.0).powi(2) - m2)).sqrt()
        / ((2.0 * j + 3.0) * ((2.0 * j + 1.0) * (2.0 * j + 5.0)).sqrt())
}

/// The real symmetric cos²θ matrix over `basis`.
pub fn cos2_matrix(basis: &RotorBasis) -> DMatrix<f64> {
    let js = basis.j_values();
    DMatrix::from_fn(js.len(), js.len(), |r, c| {
        cos2_element(js[r], js[c], basis.m())
    })
}
