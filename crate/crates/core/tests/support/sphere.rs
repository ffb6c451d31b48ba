//! Sphere quadrature for `⟨J' m| cos²θ |J m⟩`, independent of the closed
//! form: Gauss–Legendre in `cos θ`, trapezoid in `φ`, and spherical
//! harmonics from the standard normalized Legendre recursion.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `P̄_l^{|m|}(x)` for `l = |m| ..= l_max`, normalized so that
/// `Y_lm = P̄_l^m(cos θ) e^{imφ}` is orthonormal on the sphere.
pub fn normalized_legendre(l_max: u32, m: i32, x: f64) -> Vec<f64> {
    let ma = m.unsigned_abs();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    let s = (1.0 - x * x).sqrt();
    for k in 1..=ma {
        let k = f64::from(k);
        pmm *= -((2.0 * k + 1.0) / (2.0 * k)).sqrt() * s;
    }
    let mut out = vec![pmm];
    if l_max == ma {
        return out;
    }
    let mf = f64::from(ma);
    out.push(x * (2.0 * mf + 3.0).sqrt() * pmm);
    for l in ma + 2..=l_max {
        let lf = f64::from(l);
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lp = lf - 1.0;
        let a_prev = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
        let n = out.len();
        out.push(a * (x * out[n - 1] - out[n - 2] / a_prev));
    }
    out
}

/// `⟨j_row m| cos²θ |j_col m⟩` by quadrature over the sphere.
pub fn cos2_quadrature(j_row: u32, j_col: u32, m: i32) -> f64 {
    let (nodes, weights) = gauss_legendre(48);
    let n_phi = 64;
    let l_max = j_row.max(j_col);
    let ma = m.unsigned_abs();
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let p = normalized_legendre(l_max, m, *x);
        let (pr, pc) = (p[(j_row - ma) as usize], p[(j_col - ma) as usize]);
        for k in 0..n_phi {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            // conj(Y_row) · Y_col with the same m: the phases cancel only
            // after the φ sum, so keep them explicit.
            let phase = f64::from(m) * phi;
            let (c_re, c_im) = (pr * phase.cos(), -pr * phase.sin());
            let (y_re, y_im) = (pc * phase.cos(), pc * phase.sin());
            let f = w * (2.0 * PI / n_phi as f64) * x * x;
            re += f * (c_re * y_re - c_im * y_im);
            im += f * (c_re * y_im + c_im * y_re);
        }
    }
    assert!(im.abs() < 1e-13, "imaginary residue {im}");
    re
}
