//! Laser pulses and pulse trains. Times and widths are in units of the
//! revival period, strengths are the dimensionless kick strength P.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub time: f64,
    pub strength: f64,
    /// Intensity FWHM; `None` is an impulsive δ-kick.
    pub fwhm: Option<f64>,
}

impl PulseSpec {
    pub fn delta(time: f64, strength: f64) -> Self {
        Self {
            time,
            strength,
            fwhm: None,
        }
    }

    pub fn finite(time: f64, strength: f64, fwhm: f64) -> Self {
        Self {
            time,
            strength,
            fwhm: Some(fwhm),
        }
    }

    pub fn is_delta(&self) -> bool {
        self.fwhm.is_none()
    }

    fn validate(&self, index: usize) -> Result<()> {
        if !(self.time.is_finite() && self.time >= 0.0) {
            return Err(Error::Domain(format!(
                "pulse {index}: time must be finite and non-negative, got {}",
                self.time
            )));
        }
        if !(self.strength.is_finite() && self.strength >= 0.0) {
            return Err(Error::Domain(format!(
                "pulse {index}: strength must be finite and non-negative, got {}",
                self.strength
            )));
        }
        if let Some(w) = self.fwhm {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Domain(format!(
                    "pulse {index}: fwhm must be positive, got {w}"
                )));
            }
        }
        Ok(())
    }
}

/// Time-ordered pulses.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseTrain {
    pulses: Vec<PulseSpec>,
}

impl PulseTrain {
    pub fn new(pulses: Vec<PulseSpec>) -> Result<Self> {
        for (i, p) in pulses.iter().enumerate() {
            p.validate(i)?;
        }
        if let Some(i) = pulses.windows(2).position(|w| w[1].time < w[0].time) {
            return Err(Error::Domain(format!(
                "pulse times must be non-decreasing (pulse {} at {} precedes pulse {} at {})",
                i + 1,
                pulses[i + 1].time,
                i,
                pulses[i].time
            )));
        }
        Ok(Self { pulses })
    }

    /// `count` equally spaced δ-kicks starting at t = 0.
    pub fn periodic(count: usize, period: f64, strength: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Domain(format!(
                "period must be positive, got {period}"
            )));
        }
        Self::new(
            (0..count)
                .map(|k| PulseSpec::delta(k as f64 * period, strength))
                .collect(),
        )
    }

    pub fn pulses(&self) -> &[PulseSpec] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn is_delta(&self) -> bool {
        self.pulses.iter().all(PulseSpec::is_delta)
    }

    /// Same timing and strengths with every pulse given width `fwhm`
    /// (`None` turns them all into δ-kicks).
    pub fn with_fwhm(&self, fwhm: Option<f64>) -> Result<Self> {
        Self::new(
            self.pulses
                .iter()
                .map(|p| PulseSpec { fwhm, ..*p })
                .collect(),
        )
    }
}

/// A preparation train followed, after a delay, by a localizing train.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStageTrain {
    pub n_pre: usize,
    pub period_pre: f64,
    pub strength_pre: f64,
    /// From the last preparation pulse to the first localizing pulse.
    pub delay: f64,
    pub n_loc: usize,
    pub period_loc: f64,
    pub strength_loc: f64,
}

impl TwoStageTrain {
    /// The δ-kick train: preparation pulses at `k·period_pre`, localizing
    /// pulses at `t_last_pre + delay + k·period_loc`. Without preparation
    /// pulses the localizing train starts at t = 0.
    pub fn build(&self) -> Result<PulseTrain> {
        for (name, v) in [
            ("period_pre", self.period_pre),
            ("period_loc", self.period_loc),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.delay.is_finite() && self.delay >= 0.0) {
            return Err(Error::Domain(format!(
                "delay must be non-negative, got {}",
                self.delay
            )));
        }
        let mut pulses = Vec::with_capacity(self.n_pre + self.n_loc);
        pulses.extend(
            (0..self.n_pre)
                .map(|k| PulseSpec::delta(k as f64 * self.period_pre, self.strength_pre)),
        );
        let start = match self.n_pre {
            0 => 0.0,
            n => (n - 1) as f64 * self.period_pre + self.delay,
        };
        pulses.extend(
            (0..self.n_loc)
                .map(|k| PulseSpec::delta(start + k as f64 * self.period_loc, self.strength_loc)),
        );
        PulseTrain::new(pulses)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_train(delay: f64) -> TwoStageTrain {
        TwoStageTrain {
            n_pre: 3,
            period_pre: 0.237,
            strength_pre: 3.8,
            delay,
            n_loc: 12,
            period_loc: 0.267,
            strength_loc: 3.8,
        }
    }

    #[test]
    fn two_stage_layout() {
        let t = reference_train(0.243).build().unwrap();
        assert_eq!(t.len(), 15);
        let times: Vec<f64> = t.pulses().iter().map(|p| p.time).collect();
        assert!((times[2] - 0.474).abs() < 1e-15);
        assert!((times[3] - 0.717).abs() < 1e-15);
        assert!((times[14] - (0.717 + 11.0 * 0.267)).abs() < 1e-12);
        assert!(t.is_delta());
    }

    #[test]
    fn ordering_enforced() {
        let err = PulseTrain::new(vec![PulseSpec::delta(1.0, 1.0), PulseSpec::delta(0.5, 1.0)]);
        assert!(err.is_err());
        assert!(PulseTrain::new(vec![PulseSpec::delta(-0.1, 1.0)]).is_err());
        assert!(PulseTrain::new(vec![PulseSpec::delta(0.1, f64::INFINITY)]).is_err());
        assert!(PulseTrain::new(vec![PulseSpec::finite(0.1, 1.0, 0.0)]).is_err());
    }

    #[test]
    fn fwhm_toggle() {
        let t = reference_train(0.25)
            .build()
            .unwrap()
            .with_fwhm(Some(0.01))
            .unwrap();
        assert!(!t.is_delta());
        assert!(t.with_fwhm(None).unwrap().is_delta());
    }
}
