//! Closed-form intensity-noise variances of an above-threshold OPO.
//!
//! Every variance is normalized to the shot-noise limit (SNL = 1 SNU = 0 dB).
//! The formulas come from the linearized above-threshold theory, so every
//! entry point rejects `sigma < 1` instead of extrapolating.

use serde::{Deserialize, Serialize};

use crate::error::{check_nonnegative, check_positive, check_range, invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    /// Signal minus idler (twin-beam correlations).
    Difference,
    /// Signal plus idler (total parametric noise).
    Sum,
    /// One parametric beam on its own.
    SingleBeam,
}

/// A variance in shot-noise units together with its dB view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseResult {
    pub value_snu: f64,
    pub value_db: f64,
    pub kind: ChannelKind,
}

impl NoiseResult {
    pub fn new(value_snu: f64, kind: ChannelKind) -> Result<Self> {
        let value_db = to_db(value_snu)?;
        Ok(Self {
            value_snu,
            value_db,
            kind,
        })
    }
}

/// Relaxation-oscillation summary for one pump parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationInfo {
    /// `1 + gamma_p / (4 gamma)`.
    pub sigma_threshold: f64,
    /// Normalized oscillation frequency, absent below the relaxation threshold.
    pub nu_n: Option<f64>,
    /// Pump parameters for which `nu_n <= 1`, i.e. the oscillation lies in the cavity band.
    pub in_band_window: (f64, f64),
}

fn check_common(coupling_ratio: f64, eta: f64, omega: f64) -> Result<()> {
    if !(coupling_ratio > 0.0 && coupling_ratio <= 1.0) {
        return Err(invalid(
            "coupling_ratio",
            format!("{coupling_ratio} outside (0, 1]"),
        ));
    }
    check_range("eta", eta, 0.0, 1.0)?;
    check_nonnegative("omega", omega)
}

fn check_sigma(sigma: f64, omega: f64) -> Result<()> {
    if sigma.is_nan() || sigma < 1.0 || sigma.is_infinite() {
        return Err(invalid(
            "sigma",
            format!("{sigma} below threshold (need sigma >= 1)"),
        ));
    }
    if sigma == 1.0 && omega == 0.0 {
        return Err(Error::Divergence { sigma, omega });
    }
    Ok(())
}

/// Variance of the signal-idler amplitude difference. Independent of the pump.
pub fn twin_difference_variance(coupling_ratio: f64, eta: f64, omega: f64) -> Result<NoiseResult> {
    check_common(coupling_ratio, eta, omega)?;
    let value = 1.0 - coupling_ratio * eta / (1.0 + omega * omega);
    NoiseResult::new(value, ChannelKind::Difference)
}

/// Variance of the signal-idler amplitude sum.
pub fn twin_sum_variance(
    coupling_ratio: f64,
    eta: f64,
    omega: f64,
    sigma: f64,
) -> Result<NoiseResult> {
    check_common(coupling_ratio, eta, omega)?;
    check_sigma(sigma, omega)?;
    let detune = sigma - 1.0;
    let value = 1.0 + coupling_ratio * eta / (detune * detune + omega * omega);
    NoiseResult::new(value, ChannelKind::Sum)
}

pub(crate) fn single_beam_formula(prefactor: f64, omega: f64, sigma: f64) -> f64 {
    let o2 = omega * omega;
    let detune = sigma - 1.0;
    1.0 - 0.5 * prefactor * sigma * (sigma - 2.0) / ((1.0 + o2) * (o2 + detune * detune))
}

/// Amplitude-quadrature variance of one parametric beam. Equals the SNL at
/// `sigma = 2` (four times the threshold power) and is squeezed beyond it.
pub fn single_beam_variance(
    coupling_ratio: f64,
    eta: f64,
    omega: f64,
    sigma: f64,
) -> Result<NoiseResult> {
    check_common(coupling_ratio, eta, omega)?;
    check_sigma(sigma, omega)?;
    let value = single_beam_formula(coupling_ratio * eta, omega, sigma);
    NoiseResult::new(value, ChannelKind::SingleBeam)
}

/// Far-above-threshold limit of [`single_beam_variance`].
pub fn single_beam_asymptote(coupling_ratio: f64, eta: f64, omega: f64) -> Result<NoiseResult> {
    check_common(coupling_ratio, eta, omega)?;
    let value = 1.0 - 0.5 * eta * coupling_ratio / (1.0 + omega * omega);
    NoiseResult::new(value, ChannelKind::SingleBeam)
}

/// Noise after a beamsplitter of power transmission `transmission`, with
/// vacuum entering the open port.
pub fn apply_passive_loss(v_in: f64, transmission: f64) -> Result<f64> {
    check_positive("v_in", v_in)?;
    check_range("transmission", transmission, 0.0, 1.0)?;
    Ok(1.0 + transmission * (v_in - 1.0))
}

/// Adds an independent electronic floor to a signal and to its SNL reference.
/// `floor` is the electronic share of the measured reference.
pub fn add_electronic_noise(v_true: f64, floor: f64) -> Result<f64> {
    check_positive("v_true", v_true)?;
    check_floor(floor)?;
    Ok(v_true * (1.0 - floor) + floor)
}

/// Undoes [`add_electronic_noise`].
pub fn correct_electronic_noise(v_measured: f64, floor: f64) -> Result<f64> {
    check_floor(floor)?;
    if !(v_measured > floor) {
        return Err(Error::CorrectionImpossible {
            measured: v_measured,
            floor,
        });
    }
    Ok((v_measured - floor) / (1.0 - floor))
}

fn check_floor(floor: f64) -> Result<()> {
    if floor.is_nan() || !(0.0..1.0).contains(&floor) {
        return Err(invalid(
            "electronic_floor",
            format!("{floor} outside [0, 1)"),
        ));
    }
    Ok(())
}

/// Relaxation oscillations of the triply resonant cavity at pump parameter `sigma`.
pub fn relaxation_frequency(sigma: f64, gamma_p: f64, gamma: f64) -> Result<RelaxationInfo> {
    check_nonnegative("sigma", sigma)?;
    check_positive("gamma_p", gamma_p)?;
    check_positive("gamma", gamma)?;
    let sigma_threshold = 1.0 + gamma_p / (4.0 * gamma);
    let slope = gamma_p / (2.0 * gamma);
    let nu_n = (sigma >= sigma_threshold).then(|| (slope * (sigma - sigma_threshold)).sqrt());
    // nu_n = 1  <=>  sigma = sigma_threshold + 1 / slope
    let in_band_window = (sigma_threshold, sigma_threshold + 2.0 * gamma / gamma_p);
    Ok(RelaxationInfo {
        sigma_threshold,
        nu_n,
        in_band_window,
    })
}

pub fn to_db(snu: f64) -> Result<f64> {
    check_positive("snu", snu)?;
    Ok(10.0 * snu.log10())
}

pub fn from_db(db: f64) -> Result<f64> {
    if !db.is_finite() {
        return Err(invalid("db", format!("{db} is not finite")));
    }
    Ok(10f64.powf(db / 10.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAMMA: f64 = 3.2e6 / 0.6;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn difference_values() {
        let v = twin_difference_variance(0.22, 0.87, 0.6).unwrap();
        assert!(close(v.value_snu, 0.859_264_705_882_352_9, 1e-12));
        assert!(close(v.value_db, -0.658_730_263_959_688, 1e-9));
        assert_eq!(v.kind, ChannelKind::Difference);

        let crit = twin_difference_variance(0.5, 1.0, 0.6).unwrap();
        assert!(close(crit.value_snu, 0.632_352_941_176_470_6, 1e-12));
        assert!(close(crit.value_db, -1.990_404_571_266_498, 1e-9));

        assert_eq!(
            twin_difference_variance(0.3, 0.0, 0.6).unwrap().value_snu,
            1.0
        );
        assert!(twin_difference_variance(0.0, 0.5, 0.6).is_err());
        assert!(twin_difference_variance(0.3, 1.2, 0.6).is_err());
        assert!(twin_difference_variance(0.3, 0.5, -0.1).is_err());
    }

    #[test]
    fn sum_values() {
        let v = twin_sum_variance(0.22, 0.87, 0.6, 2.0).unwrap();
        assert!(close(v.value_snu, 1.140_735_294_117_647, 1e-12));
        let far = twin_sum_variance(0.22, 0.87, 0.6, 1e4).unwrap();
        assert!(close(far.value_snu, 1.0, 1e-8));
        assert!(matches!(
            twin_sum_variance(0.5, 0.9, 0.0, 1.0),
            Err(Error::Divergence { .. })
        ));
        // sigma = 1 is fine at nonzero sideband
        assert!(twin_sum_variance(0.5, 0.9, 0.1, 1.0).is_ok());
        assert!(twin_sum_variance(0.5, 0.9, 0.6, 0.9).is_err());
    }

    #[test]
    fn single_beam_values() {
        for &(r, eta, omega) in &[(0.22, 0.73, 0.6), (1.0, 1.0, 0.0), (0.5, 0.3, 2.0)] {
            let v = single_beam_variance(r, eta, omega, 2.0).unwrap();
            assert_eq!(v.value_snu, 1.0);
        }
        let v = single_beam_variance(0.22, 0.73, 0.6, 3.0).unwrap();
        assert!(close(v.value_snu, 0.959_373_313_545_601_7, 1e-12));
        let ideal = single_beam_variance(1.0, 1.0, 0.0, 1e7).unwrap();
        assert!(close(ideal.value_snu, 0.5, 1e-6));
        assert!(matches!(
            single_beam_variance(0.2, 0.7, 0.0, 1.0),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn asymptote_values() {
        let a = single_beam_asymptote(0.22, 0.73, 0.6).unwrap();
        assert!(close(a.value_snu, 0.940_955_882_352_941_1, 1e-12));
        assert_eq!(single_beam_asymptote(1.0, 1.0, 0.0).unwrap().value_snu, 0.5);
        assert_eq!(single_beam_asymptote(0.4, 0.0, 0.6).unwrap().value_snu, 1.0);
    }

    #[test]
    fn passive_loss() {
        assert!(close(apply_passive_loss(0.8, 0.5).unwrap(), 0.9, 1e-15));
        assert_eq!(apply_passive_loss(0.8, 1.0).unwrap(), 0.8);
        assert_eq!(apply_passive_loss(0.8, 0.0).unwrap(), 1.0);
        assert!(apply_passive_loss(0.8, 1.01).is_err());
        assert!(apply_passive_loss(0.8, -0.01).is_err());
        assert!(apply_passive_loss(0.0, 0.5).is_err());
    }

    #[test]
    fn electronic_noise() {
        assert_eq!(correct_electronic_noise(0.78, 0.0).unwrap(), 0.78);
        assert!(close(
            correct_electronic_noise(0.78, 0.1).unwrap(),
            0.755_555_555_555_555_5,
            1e-15
        ));
        assert!(close(
            correct_electronic_noise(1.0, 0.1).unwrap(),
            1.0,
            1e-15
        ));
        assert!(matches!(
            correct_electronic_noise(0.1, 0.1),
            Err(Error::CorrectionImpossible { .. })
        ));
        assert!(correct_electronic_noise(0.5, 1.0).is_err());
    }

    #[test]
    fn relaxation_values() {
        let info = relaxation_frequency(3.0, 30e6, GAMMA).unwrap();
        assert!(close(info.sigma_threshold, 2.40625, 1e-12));
        assert!(close(info.in_band_window.0, 2.40625, 1e-12));
        assert!(close(info.in_band_window.1, 2.761_805_555_555_555_6, 1e-12));
        assert!(close(info.nu_n.unwrap(), 1.292_254_570_508_458, 1e-12));

        let at = relaxation_frequency(info.sigma_threshold, 30e6, GAMMA).unwrap();
        assert_eq!(at.nu_n, Some(0.0));
        assert_eq!(relaxation_frequency(2.0, 30e6, GAMMA).unwrap().nu_n, None);

        // top of the window is where nu_n reaches the cavity bandwidth
        let top = relaxation_frequency(info.in_band_window.1, 30e6, GAMMA).unwrap();
        assert!(close(top.nu_n.unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn db_conversions() {
        assert_eq!(to_db(1.0).unwrap(), 0.0);
        assert!(close(to_db(0.5).unwrap(), -3.010_299_956_639_812, 1e-12));
        assert!(close(
            from_db(-2.7).unwrap(),
            0.537_031_796_370_252_7,
            1e-12
        ));
        assert!(to_db(0.0).is_err());
        assert!(to_db(-1.0).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
            (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        }

        proptest! {
            #[test]
            fn difference_bounded_and_pump_independent(
                r in 0.01f64..=1.0, eta in 0.0f64..=1.0, omega in 0.0f64..5.0,
            ) {
                let v = twin_difference_variance(r, eta, omega).unwrap().value_snu;
                prop_assert!(v <= 1.0);
                prop_assert!(v >= 1.0 - eta * r - 1e-15);
                let at_zero = twin_difference_variance(r, eta, 0.0).unwrap().value_snu;
                prop_assert!((at_zero - (1.0 - eta * r)).abs() < 1e-15);
            }

            #[test]
            fn sum_above_snl_and_decreasing(
                r in 0.01f64..=1.0, eta in 0.01f64..=1.0, omega in 0.01f64..5.0,
            ) {
                let values: Vec<f64> = grid(1.0, 20.0, 200)
                    .map(|s| twin_sum_variance(r, eta, omega, s).unwrap().value_snu)
                    .collect();
                prop_assert!(values.iter().all(|&v| v >= 1.0));
                prop_assert!(values.windows(2).all(|w| w[1] < w[0]));
            }

            #[test]
            fn single_beam_shape(
                r in 0.01f64..=1.0, eta in 0.01f64..=1.0, omega in 0.0f64..3.0,
            ) {
                prop_assert_eq!(single_beam_variance(r, eta, omega, 2.0).unwrap().value_snu, 1.0);
                for s in grid(1.01, 1.99, 50) {
                    prop_assert!(single_beam_variance(r, eta, omega, s).unwrap().value_snu > 1.0);
                }
                let asym = single_beam_asymptote(r, eta, omega).unwrap().value_snu;
                let above: Vec<f64> = grid(2.01, 200.0, 400)
                    .map(|s| single_beam_variance(r, eta, omega, s).unwrap().value_snu)
                    .collect();
                prop_assert!(above.iter().all(|&v| v < 1.0 && v > asym));
                prop_assert!(above.windows(2).all(|w| w[1] < w[0]));
                let far = single_beam_variance(r, eta, omega, 1000.0).unwrap().value_snu;
                prop_assert!((far - asym).abs() < 1e-3);
            }

            #[test]
            fn relaxation_frequency_squared_is_affine(
                gp in 1e6f64..1e8, g in 1e6f64..1e8, h in 0.01f64..0.5,
            ) {
                let start = relaxation_frequency(0.0, gp, g).unwrap().sigma_threshold;
                let slope = gp / (2.0 * g);
                let nu2 = |s: f64| relaxation_frequency(s, gp, g).unwrap().nu_n.unwrap().powi(2);
                for k in 1..20 {
                    let s = start + 0.6 + k as f64 * 0.37;
                    let fd = (nu2(s + h) - nu2(s - h)) / (2.0 * h);
                    prop_assert!((fd - slope).abs() / slope < 1e-9);
                }
            }

            #[test]
            fn loss_composes(v in 0.05f64..20.0, t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
                let stepwise = apply_passive_loss(apply_passive_loss(v, t1).unwrap(), t2).unwrap();
                let joint = apply_passive_loss(v, t1 * t2).unwrap();
                prop_assert!((stepwise - joint).abs() < 1e-12 * v.max(1.0));
            }

            #[test]
            fn electronic_correction_inverts_floor(v in 0.01f64..50.0, floor in 0.0f64..0.95) {
                let measured = add_electronic_noise(v, floor).unwrap();
                let back = correct_electronic_noise(measured, floor).unwrap();
                prop_assert!((back - v).abs() <= 1e-12 * v.max(1.0));
            }

            #[test]
            fn db_round_trip(log_x in -3.0f64..3.0) {
                let x = 10f64.powf(log_x);
                let back = from_db(to_db(x).unwrap()).unwrap();
                prop_assert!((back - x).abs() / x < 1e-12);
            }
        }
    }
}
