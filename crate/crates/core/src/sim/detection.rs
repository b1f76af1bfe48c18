use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{check_nonnegative, check_positive, check_range, invalid, Result};

/// Balanced detector pair followed by a zero-span spectrum analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionChain {
    /// Total detection efficiency, already folded into the predicted variances.
    pub eta: f64,
    /// Fractional gain mismatch between the two detectors.
    pub cmrr_imbalance: f64,
    /// Electronic-noise share of the measured SNL reference, in SNU.
    pub electronic_floor: f64,
    /// Resolution bandwidth (Hz).
    pub rbw: f64,
    /// Video bandwidth (Hz).
    pub vbw: f64,
    /// Running-average length in trace points.
    pub avg_count: usize,
    /// Zero-span center frequency (Hz).
    pub nu_center: f64,
}

impl DetectionChain {
    pub fn new(
        eta: f64,
        cmrr_imbalance: f64,
        electronic_floor: f64,
        rbw: f64,
        vbw: f64,
        avg_count: usize,
        nu_center: f64,
    ) -> Result<Self> {
        let chain = Self {
            eta,
            cmrr_imbalance,
            electronic_floor,
            rbw,
            vbw,
            avg_count,
            nu_center,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        check_range("eta", self.eta, 0.0, 1.0)?;
        check_nonnegative("cmrr_imbalance", self.cmrr_imbalance)?;
        if self.cmrr_imbalance >= 2.0 {
            return Err(invalid("cmrr_imbalance", "must be below 2"));
        }
        if self.electronic_floor.is_nan() || !(0.0..1.0).contains(&self.electronic_floor) {
            return Err(invalid(
                "electronic_floor",
                format!("{} outside [0, 1)", self.electronic_floor),
            ));
        }
        check_positive("vbw", self.vbw)?;
        check_positive("rbw", self.rbw)?;
        if self.rbw <= self.vbw {
            return Err(invalid(
                "rbw",
                format!("rbw {} must exceed vbw {}", self.rbw, self.vbw),
            ));
        }
        if self.avg_count == 0 {
            return Err(invalid("avg_count", "must be at least 1"));
        }
        check_positive("nu_center", self.nu_center)
    }

    /// Electronic-noise variance per detector in units of that detector's shot noise.
    pub fn electronic_variance(&self) -> f64 {
        self.electronic_floor / (1.0 - self.electronic_floor)
    }

    /// Rejection of a common-mode signal, relative to the same signal seen
    /// through a single detector: `-10 log10(eps^2)`.
    pub fn common_mode_rejection_db(&self) -> f64 {
        -20.0 * self.cmrr_imbalance.log10()
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        self.eta = eta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_electronic_floor(mut self, floor: f64) -> Result<Self> {
        self.electronic_floor = floor;
        self.validate()?;
        Ok(self)
    }

    pub fn with_cmrr_imbalance(mut self, eps: f64) -> Result<Self> {
        self.cmrr_imbalance = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn with_avg_count(mut self, n: usize) -> Result<Self> {
        self.avg_count = n;
        self.validate()?;
        Ok(self)
    }

    /// Detector weights `(g_signal, g_idler)` of the combined photocurrent.
    pub fn combine_weights(&self, mode: CombineMode) -> (f64, f64) {
        let half = 0.5 * self.cmrr_imbalance;
        let gs = (1.0 + half) * FRAC_1_SQRT_2;
        let gi = (1.0 - half) * FRAC_1_SQRT_2;
        match mode {
            CombineMode::Sum => (gs, gi),
            CombineMode::Difference => (gs, -gi),
        }
    }

    /// Relative DC level of the combined channel when each detector sees one
    /// unit of DC photocurrent. Sets the SNL of that channel.
    pub fn combined_dc_weight(&self, mode: CombineMode) -> f64 {
        let (gs, gi) = self.combine_weights(mode);
        gs * gs + gi * gi
    }

    /// Expected variance of the combined photocurrent (shot-noise units of one
    /// detector) for beams with pair variances `v_minus`, `v_plus`, including
    /// the electronic floor and the gain imbalance.
    pub fn combined_variance(&self, mode: CombineMode, v_minus: f64, v_plus: f64) -> f64 {
        let (gs, gi) = self.combine_weights(mode);
        let single = 0.5 * (v_plus + v_minus) + self.electronic_variance();
        let cov = 0.5 * (v_plus - v_minus);
        (gs * gs + gi * gi) * single + 2.0 * gs * gi * cov
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineMode {
    Sum,
    Difference,
}

/// Balanced sum or difference of the two detector photocurrents, with the
/// chain's gain imbalance applied as `1 +/- eps/2` on the two detectors.
pub fn balanced_combine(
    signal: &[f64],
    idler: &[f64],
    mode: CombineMode,
    chain: &DetectionChain,
) -> Vec<f64> {
    let (gs, gi) = chain.combine_weights(mode);
    signal
        .iter()
        .zip(idler)
        .map(|(s, i)| gs * s + gi * i)
        .collect()
}

/// Shot-noise power per unit DC photocurrent as seen by a particular analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnlCalibration {
    pub power_per_dc: f64,
}

/// SNL reference power for a DC photocurrent level.
pub fn shot_noise_reference(dc_level: f64, calibration: &SnlCalibration) -> Result<f64> {
    check_nonnegative("dc_level", dc_level)?;
    Ok(calibration.power_per_dc * dc_level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(eps: f64) -> DetectionChain {
        DetectionChain::new(0.87, eps, 0.0, 300e3, 10e3, 50, 3.2e6).unwrap()
    }

    #[test]
    fn invariants_enforced() {
        assert!(DetectionChain::new(1.1, 0.0, 0.0, 300e3, 10e3, 50, 3.2e6).is_err());
        assert!(DetectionChain::new(0.8, 0.0, 1.0, 300e3, 10e3, 50, 3.2e6).is_err());
        assert!(DetectionChain::new(0.8, 0.0, 0.0, 10e3, 300e3, 50, 3.2e6).is_err());
        assert!(DetectionChain::new(0.8, 0.0, 0.0, 300e3, 10e3, 0, 3.2e6).is_err());
        assert!(DetectionChain::new(0.8, -0.1, 0.0, 300e3, 10e3, 1, 3.2e6).is_err());
    }

    #[test]
    fn perfect_rejection_of_identical_traces() {
        let x: Vec<f64> = (0..100).map(|k| (k as f64 * 0.37).sin()).collect();
        let diff = balanced_combine(&x, &x, CombineMode::Difference, &chain(0.0));
        assert!(diff.iter().all(|&d| d == 0.0));
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let sum = balanced_combine(&x, &neg, CombineMode::Sum, &chain(0.0));
        assert!(sum.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn one_percent_imbalance_leaks_minus_40_db() {
        let c = chain(0.01);
        let x: Vec<f64> = (0..1000).map(|k| (k as f64 * 0.91).cos()).collect();
        let zeros = vec![0.0; x.len()];
        let power = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
        let residual = power(&balanced_combine(&x, &x, CombineMode::Difference, &c));
        // the same signal on one detector alone, ideal gain
        let single = power(&balanced_combine(
            &x,
            &zeros,
            CombineMode::Difference,
            &chain(0.0),
        ));
        let ratio = residual / single;
        assert!((ratio - 1e-4).abs() < 1e-16, "{ratio}");
        assert!((c.common_mode_rejection_db() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn combined_variance_matches_pair_variances() {
        let c = chain(0.0);
        assert!((c.combined_variance(CombineMode::Difference, 0.8, 1.6) - 0.8).abs() < 1e-15);
        assert!((c.combined_variance(CombineMode::Sum, 0.8, 1.6) - 1.6).abs() < 1e-15);
        assert!((c.combined_dc_weight(CombineMode::Sum) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn snl_reference_is_linear() {
        let cal = SnlCalibration { power_per_dc: 2.5 };
        assert_eq!(shot_noise_reference(0.0, &cal).unwrap(), 0.0);
        let a = shot_noise_reference(1.5, &cal).unwrap();
        let b = shot_noise_reference(2.25, &cal).unwrap();
        assert!((shot_noise_reference(3.75, &cal).unwrap() - (a + b)).abs() < 1e-12);
        assert_eq!(
            shot_noise_reference(2.0, &cal).unwrap(),
            2.0 * shot_noise_reference(1.0, &cal).unwrap()
        );
        assert!(shot_noise_reference(-1.0, &cal).is_err());
    }
}
