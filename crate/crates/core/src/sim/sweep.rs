//! Pump-laser detuning sweeps through a resonance carrying several PDC channels.

use serde::{Deserialize, Serialize};

use super::analyzer::ZeroSpanAnalyzer;
use super::detection::{CombineMode, DetectionChain};
use super::photocurrent::{synthesize, PairShape};
use crate::cavity::CavityParams;
use crate::error::{check_positive, invalid, Error, Result};
use crate::variance::{twin_difference_variance, twin_sum_variance};

/// One parametric channel excited while the pump is swept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdcChannel {
    /// Pump detuning of the channel center (Hz).
    pub center: f64,
    /// Pump parameter at the channel center.
    pub sigma: f64,
    /// Full width of the squared-Lorentzian taper (Hz).
    pub width: f64,
}

impl PdcChannel {
    /// Pump parameter at detuning `detuning`: `sigma / (1 + x^2)^2` with `x`
    /// the offset in units of the half width.
    pub fn sigma_at(&self, detuning: f64) -> f64 {
        let x = 2.0 * (detuning - self.center) / self.width;
        let l = 1.0 / (1.0 + x * x);
        self.sigma * l * l
    }

    /// Detuning range over which the channel oscillates (`sigma_at > 1`).
    pub fn active_range(&self) -> Option<(f64, f64)> {
        if self.sigma <= 1.0 {
            return None;
        }
        let half = 0.5 * self.width * (self.sigma.sqrt() - 1.0).sqrt();
        Some((self.center - half, self.center + half))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Expected analyzer output, no estimator noise.
    Expected,
    /// Full photocurrent simulation through the analyzer.
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub channels: Vec<PdcChannel>,
    /// Full detuning span, centered on the pump resonance (Hz).
    pub span: f64,
    pub points: usize,
    /// Duration of one sweep (s).
    pub sweep_time: f64,
    /// Photocurrent sample rate used by the Monte-Carlo mode (Hz).
    pub sample_rate: f64,
    pub mode: SweepMode,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelMarker {
    pub center: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrace {
    pub detuning: Vec<f64>,
    pub snl: Vec<f64>,
    pub noise_diff: Vec<f64>,
    pub noise_sum: Vec<f64>,
    pub noise_single: Vec<f64>,
    /// Pump power transmission past the coupler.
    pub pump_transmission: Vec<f64>,
    /// Pump parameter at each point (0 where no channel oscillates).
    pub sigma: Vec<f64>,
    pub channel_markers: Vec<ChannelMarker>,
}

impl SweepTrace {
    pub fn len(&self) -> usize {
        self.detuning.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detuning.is_empty()
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("span", self.span)?;
        check_positive("sweep_time", self.sweep_time)?;
        check_positive("sample_rate", self.sample_rate)?;
        if self.points == 0 {
            return Err(invalid("points", "sweep needs at least one point"));
        }
        for c in &self.channels {
            check_positive("channel width", c.width)?;
            if !(c.sigma >= 0.0) || !c.sigma.is_finite() || !c.center.is_finite() {
                return Err(invalid("channel", format!("{c:?}")));
            }
        }
        for (i, a) in self.channels.iter().enumerate() {
            for (j, b) in self.channels.iter().enumerate().skip(i + 1) {
                if (a.center - b.center).abs() < 0.5 * (a.width + b.width) {
                    return Err(Error::OverlappingChannels {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn detunings(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![0.0];
        }
        let step = self.span / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| -0.5 * self.span + k as f64 * step)
            .collect()
    }

    /// Pump parameter at a detuning: the strongest channel there, or 0.
    pub fn sigma_at(&self, detuning: f64) -> f64 {
        self.channels
            .iter()
            .map(|c| c.sigma_at(detuning))
            .fold(0.0, f64::max)
    }
}

/// Sweeps the pump laser across the resonance and records the analyzer
/// output of the difference, sum and single-beam channels together with the
/// SNL reference. Points where no channel is above threshold read 1 SNU.
pub fn detuning_sweep(
    cavity: &CavityParams,
    chain: &DetectionChain,
    cfg: &SweepConfig,
) -> Result<SweepTrace> {
    chain.validate()?;
    cfg.validate()?;
    let detuning = cfg.detunings();
    let omega = chain.nu_center / cavity.gamma();
    let ratio = cavity.coupling_ratio();

    let mut sigma = Vec::with_capacity(cfg.points);
    let mut shapes = Vec::with_capacity(cfg.points);
    for &d in &detuning {
        let s = cfg.sigma_at(d);
        if s > 1.0 {
            let v_minus = twin_difference_variance(ratio, chain.eta, omega)?.value_snu;
            let v_plus = twin_sum_variance(ratio, chain.eta, omega, s)?.value_snu;
            sigma.push(s);
            shapes.push((v_minus, v_plus));
        } else {
            sigma.push(0.0);
            shapes.push((1.0, 1.0));
        }
    }

    let samples_per_point =
        ((cfg.sample_rate * cfg.sweep_time / cfg.points as f64).round() as usize).max(1);
    let analyzer =
        ZeroSpanAnalyzer::new(chain, cfg.sample_rate)?.with_output_interval(samples_per_point);
    let cal = analyzer.snl_calibration();
    let n = samples_per_point * cfg.points;
    let snl_diff = cal.power_per_dc * chain.combined_dc_weight(CombineMode::Difference);
    let snl_sum = cal.power_per_dc * chain.combined_dc_weight(CombineMode::Sum);
    let snl_single = cal.power_per_dc;

    let (snl, noise_diff, noise_sum, noise_single) = match cfg.mode {
        SweepMode::Expected => {
            let gain = analyzer.noise_gain();
            let e = chain.electronic_variance();
            let expand = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
                let mut out = Vec::with_capacity(n);
                for &(vm, vp) in &shapes {
                    out.extend(std::iter::repeat_n(gain * f(vm, vp), samples_per_point));
                }
                out
            };
            let diff = expand(&|vm, vp| chain.combined_variance(CombineMode::Difference, vm, vp));
            let sum = expand(&|vm, vp| chain.combined_variance(CombineMode::Sum, vm, vp));
            let single = expand(&|vm, vp| 0.5 * (vm + vp) + e);
            let reference = vec![gain * (1.0 + e); n];
            (
                analyzer.post_detection(&reference, snl_single),
                analyzer.post_detection(&diff, snl_diff),
                analyzer.post_detection(&sum, snl_sum),
                analyzer.post_detection(&single, snl_single),
            )
        }
        SweepMode::MonteCarlo => {
            let electronic_sd = chain.electronic_variance().sqrt();
            let pair_shapes: Vec<PairShape> = shapes
                .iter()
                .map(|&(vm, vp)| PairShape::from_variances(vm, vp))
                .collect();
            let (signal, idler) = synthesize(n, cfg.seed, 1.0, electronic_sd, |k| {
                pair_shapes[k / samples_per_point]
            });
            // independent shot-noise-limited beam for the reference trace
            let (reference, _) = synthesize(n, cfg.seed ^ 0x5A17_5EED, 1.0, electronic_sd, |_| {
                PairShape::SHOT_NOISE
            });
            let diff = super::balanced_combine(&signal, &idler, CombineMode::Difference, chain);
            let sum = super::balanced_combine(&signal, &idler, CombineMode::Sum, chain);
            (
                analyzer.analyze(&reference, snl_single)?.power_snu,
                analyzer.analyze(&diff, snl_diff)?.power_snu,
                analyzer.analyze(&sum, snl_sum)?.power_snu,
                analyzer.analyze(&signal, snl_single)?.power_snu,
            )
        }
    };

    let kappa = cavity.pump_coupling_ratio();
    let depth = 4.0 * kappa * (1.0 - kappa);
    let pump_transmission = detuning
        .iter()
        .map(|d| {
            let x = 2.0 * d / cavity.gamma_p();
            1.0 - depth / (1.0 + x * x)
        })
        .collect();

    Ok(SweepTrace {
        detuning,
        snl,
        noise_diff,
        noise_sum,
        noise_single,
        pump_transmission,
        sigma,
        channel_markers: cfg
            .channels
            .iter()
            .map(|c| ChannelMarker {
                center: c.center,
                sigma: c.sigma,
            })
            .collect(),
    })
}
