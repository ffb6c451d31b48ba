mod support;

use qkr_core::{cos2_matrix, Parity, RotorBasis};
use support::sphere::{cos2_quadrature, gauss_legendre, normalized_legendre};

#[test]
fn quadrature_rule_integrates_polynomials() {
    let (x, w) = gauss_legendre(48);
    let total: f64 = w.iter().sum();
    assert!((total - 2.0).abs() < 1e-14);
    let x4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
    assert!((x4 - 0.4).abs() < 1e-14);
}

#[test]
fn harmonics_are_orthonormal() {
    let (x, w) = gauss_legendre(48);
    for m in [0, 3, -5] {
        let rows: Vec<Vec<f64>> = x.iter().map(|x| normalized_legendre(12, m, *x)).collect();
        let n = rows[0].len();
        for a in 0..n {
            for b in 0..n {
                let s: f64 = rows
                    .iter()
                    .zip(&w)
                    .map(|(r, w)| 2.0 * std::f64::consts::PI * w * r[a] * r[b])
                    .sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "m={m} a={a} b={b} {s}");
            }
        }
    }
}

#[test]
fn closed_form_matches_sphere_quadrature() {
    let mut worst: f64 = 0.0;
    for j_max in 0..=10u32 {
        for m in -(j_max as i32)..=(j_max as i32) {
            let basis = RotorBasis::new(j_max, Parity::Both, m).unwrap();
            let matrix = cos2_matrix(&basis);
            for (r, &jr) in basis.j_values().iter().enumerate() {
                for (c, &jc) in basis.j_values().iter().enumerate() {
                    let err = (matrix[(r, c)] - cos2_quadrature(jr, jc, m)).abs();
                    worst = worst.max(err);
                    assert!(err < 1e-10, "J'={jr} J={jc} m={m}: error {err}");
                }
            }
        }
    }
    eprintln!("worst matrix-element error {worst:.2e}");
}
