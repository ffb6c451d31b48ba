//! Quantum resonances: train periods commensurate with the revival period,
//! `T / T_rev = p / q`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub p: u64,
    pub q: u64,
    /// `|period − p/q|` in units of T_rev.
    pub distance: f64,
}

/// Nearest fraction `p/q` (in lowest terms) with `q <= q_max`.
/// Ties go to the smaller denominator.
pub fn resonance_distance(period: f64, q_max: u64) -> Result<Resonance> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::Domain(format!(
            "period must be positive, got {period}"
        )));
    }
    if q_max == 0 {
        return Err(Error::Domain("q_max must be at least 1".into()));
    }
    let mut best: Option<Resonance> = None;
    for q in 1..=q_max {
        let p = (period * q as f64).round() as u64;
        let distance = (period - p as f64 / q as f64).abs();
        if best.is_none_or(|b| distance < b.distance) {
            let g = gcd(p, q);
            best = Some(Resonance {
                p: p / g,
                q: q / g,
                distance,
            });
        }
    }
    Ok(best.expect("q_max >= 1"))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Effective Planck constant `τ = ħT/I = 2π T/T_rev`.
pub fn tau_from_period(period: f64) -> f64 {
    2.0 * PI * period
}

pub fn period_from_tau(tau: f64) -> f64 {
    tau / (2.0 * PI)
}
