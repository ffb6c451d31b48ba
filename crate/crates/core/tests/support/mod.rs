#![allow(dead_code)]

pub mod sphere;

/// Least-squares fit of `y = Σ c_k x^k` up to `degree`; returns the
/// coefficients and the residual vector.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> (Vec<f64>, Vec<f64>) {
    let n = degree + 1;
    let mut a = vec![vec![0.0; n + 1]; n];
    for (xi, yi) in x.iter().zip(y) {
        let powers: Vec<f64> = (0..2 * n).map(|k| xi.powi(k as i32)).collect();
        for r in 0..n {
            for c in 0..n {
                a[r][c] += powers[r + c];
            }
            a[r][n] += powers[r] * yi;
        }
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (row, r) in a.iter_mut().enumerate() {
            if row != col {
                let f = r[col] / pivot_row[col];
                for (x, p) in r.iter_mut().zip(&pivot_row).skip(col) {
                    *x -= f * p;
                }
            }
        }
    }
    let coef: Vec<f64> = (0..n).map(|i| a[i][n] / a[i][i]).collect();
    let resid = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            yi - coef
                .iter()
                .enumerate()
                .map(|(k, c)| c * xi.powi(k as i32))
                .sum::<f64>()
        })
        .collect();
    (coef, resid)
}

/// Coefficient of determination of a straight-line fit.
pub fn r_squared_linear(x: &[f64], y: &[f64]) -> f64 {
    let (_, resid) = polyfit(x, y, 1);
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = resid.iter().map(|r| r * r).sum();
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    1.0 - ss_res / ss_tot
}
