//! Zero-span spectrum analyzer.
//!
//! The trace is mixed down from `nu_center`, passed through a four-pole
//! synchronously tuned resolution filter, power-detected, smoothed by a
//! one-pole video filter, reduced to one point per video period with an
//! average detector, and finally smoothed by a centered running average.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::detection::{DetectionChain, SnlCalibration};
use crate::error::{check_positive, Error, Result};

const RBW_POLES: usize = 4;
const PHASE_RESYNC: usize = 1024;

#[derive(Debug, Clone)]
pub struct ZeroSpanAnalyzer {
    chain: DetectionChain,
    sample_rate: f64,
    rbw_pole: f64,
    vbw_pole: f64,
    noise_gain: f64,
    correlation_sum: f64,
    settle: usize,
    interval: usize,
}

/// Power-versus-time output of the analyzer, normalized to an SNL reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSpanTrace {
    /// Time between output points (s).
    pub interval: f64,
    pub power_snu: Vec<f64>,
    /// Mean detected power over the whole record after filter settling.
    pub mean_snu: f64,
    /// Standard error of `mean_snu` for Gaussian input.
    pub std_error: f64,
}

impl ZeroSpanAnalyzer {
    pub fn new(chain: &DetectionChain, sample_rate: f64) -> Result<Self> {
        chain.validate()?;
        check_positive("sample_rate", sample_rate)?;
        let required = 2.0 * (chain.nu_center + chain.rbw);
        if sample_rate <= required {
            return Err(Error::BandwidthMismatch {
                sample_rate,
                required,
            });
        }

        // Per-pole corner so the cascade has a -3 dB full width of `rbw`.
        let half_width = 0.5 * chain.rbw;
        let corner = half_width / (2f64.powf(1.0 / RBW_POLES as f64) - 1.0).sqrt();
        let rbw_pole = (-TAU * corner / sample_rate).exp();
        let vbw_pole = (-TAU * chain.vbw / sample_rate).exp();

        let h = impulse_response(rbw_pole);
        let noise_gain: f64 = h.iter().map(|v| v * v).sum();
        let mut correlation_sum = 1.0;
        for lag in 1..h.len() {
            let r: f64 = h[..h.len() - lag]
                .iter()
                .zip(&h[lag..])
                .map(|(a, b)| a * b)
                .sum();
            correlation_sum += 2.0 * (r / noise_gain).powi(2);
        }
        let mut energy = 0.0;
        let settle = h
            .iter()
            .position(|v| {
                energy += v * v;
                energy >= (1.0 - 1e-12) * noise_gain
            })
            .unwrap_or(h.len());

        let interval = ((sample_rate / chain.vbw).round() as usize).max(1);
        Ok(Self {
            chain: *chain,
            sample_rate,
            rbw_pole,
            vbw_pole,
            noise_gain,
            correlation_sum,
            settle,
            interval,
        })
    }

    /// Overrides the number of input samples per output point.
    pub fn with_output_interval(mut self, samples: usize) -> Self {
        self.interval = samples.max(1);
        self
    }

    pub fn chain(&self) -> &DetectionChain {
        &self.chain
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn output_interval(&self) -> usize {
        self.interval
    }

    /// Detected power per unit input variance for white input.
    pub fn noise_gain(&self) -> f64 {
        self.noise_gain
    }

    /// Number of input samples per statistically independent power sample.
    pub fn correlation_length(&self) -> f64 {
        self.correlation_sum
    }

    /// Calibration for detectors carrying the chain's electronic floor.
    pub fn snl_calibration(&self) -> SnlCalibration {
        SnlCalibration {
            power_per_dc: self.noise_gain * (1.0 + self.chain.electronic_variance()),
        }
    }

    /// Squared magnitude of the resolution-filtered, mixed-down trace.
    pub fn detect(&self, trace: &[f64]) -> Vec<f64> {
        let a = self.rbw_pole;
        let b = 1.0 - a;
        let omega = TAU * self.chain.nu_center / self.sample_rate;
        let (step_sin, step_cos) = omega.sin_cos();
        let mut re = [0.0; RBW_POLES];
        let mut im = [0.0; RBW_POLES];
        let (mut sin, mut cos) = (0.0, 1.0);
        let mut out = Vec::with_capacity(trace.len());
        for (n, &x) in trace.iter().enumerate() {
            if n % PHASE_RESYNC == 0 {
                (sin, cos) = (omega * n as f64).sin_cos();
            }
            let mut zr = x * cos;
            let mut zi = -x * sin;
            for k in 0..RBW_POLES {
                re[k] = a * re[k] + b * zr;
                im[k] = a * im[k] + b * zi;
                zr = re[k];
                zi = im[k];
            }
            out.push(zr * zr + zi * zi);
            (sin, cos) = (
                sin * step_cos + cos * step_sin,
                cos * step_cos - sin * step_sin,
            );
        }
        out
    }

    /// Video filter, average detector, running average and SNL normalization
    /// applied to a detected-power record.
    pub fn post_detection(&self, detected: &[f64], snl_power: f64) -> Vec<f64> {
        if detected.is_empty() {
            return Vec::new();
        }
        let first = detected.len().min(self.interval);
        let mut state = detected[..first].iter().sum::<f64>() / first as f64;
        let a = self.vbw_pole;
        let points = (detected.len() / self.interval).max(1);
        let mut raw = Vec::with_capacity(points);
        for chunk in detected.chunks(self.interval).take(points) {
            let mut acc = 0.0;
            for &p in chunk {
                state = a * state + (1.0 - a) * p;
                acc += state;
            }
            raw.push(acc / chunk.len() as f64);
        }
        running_average(&raw, self.chain.avg_count)
            .into_iter()
            .map(|p| p / snl_power)
            .collect()
    }

    pub fn analyze(&self, trace: &[f64], snl_power: f64) -> Result<ZeroSpanTrace> {
        check_positive("snl_power", snl_power)?;
        let detected = self.detect(trace);
        let used = if detected.len() > 2 * self.settle {
            &detected[self.settle..]
        } else {
            &detected[..]
        };
        let (mean_snu, std_error) = if used.is_empty() {
            (0.0, 0.0)
        } else {
            let mean = used.iter().sum::<f64>() / used.len() as f64 / snl_power;
            (
                mean,
                mean * (self.correlation_sum / used.len() as f64).sqrt(),
            )
        };
        Ok(ZeroSpanTrace {
            interval: self.interval as f64 / self.sample_rate,
            power_snu: self.post_detection(&detected, snl_power),
            mean_snu,
            std_error,
        })
    }
}

/// Analyzes one trace with a fresh analyzer.
pub fn zero_span_analyze(
    trace: &[f64],
    sample_rate: f64,
    chain: &DetectionChain,
    snl_power: f64,
) -> Result<ZeroSpanTrace> {
    ZeroSpanAnalyzer::new(chain, sample_rate)?.analyze(trace, snl_power)
}

fn impulse_response(pole: f64) -> Vec<f64> {
    let b = 1.0 - pole;
    let mut state = [0.0; RBW_POLES];
    let mut h = Vec::new();
    let mut peak = 0.0f64;
    for n in 0.. {
        let mut x = if n == 0 { 1.0 } else { 0.0 };
        for s in state.iter_mut() {
            *s = pole * *s + b * x;
            x = *s;
        }
        peak = peak.max(x.abs());
        h.push(x);
        if n > RBW_POLES * 4 && x.abs() < 1e-17 * peak {
            break;
        }
    }
    h
}

/// Centered moving average with the window truncated at the record edges.
fn running_average(values: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 {
        return values.to_vec();
    }
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    let before = window / 2;
    let after = window - 1 - before;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after + 1).min(values.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn chain(avg: usize) -> DetectionChain {
        DetectionChain::new(0.87, 0.0, 0.0, 300e3, 10e3, avg, 3.2e6).unwrap()
    }

    fn white(n: usize, variance: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sd = variance.sqrt();
        (0..n)
            .map(|_| sd * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect::<Vec<f64>>()
    }

    /// Noise gain of the resolution filter from its closed form: each pole
    /// contributes `(1-a)/(1+a)` alone, and the cascade's squared norm is a
    /// finite sum over the repeated-pole expansion.
    fn cascade_norm_oracle(a: f64) -> f64 {
        // sum_n C(n+3,3)^2 a^(2n) (1-a)^8, summed until negligible
        let b = 1.0 - a;
        let mut total = 0.0;
        let mut n = 0u64;
        loop {
            let c = ((n + 1) * (n + 2) * (n + 3)) as f64 / 6.0;
            let term = c * c * a.powi(2 * n as i32);
            total += term;
            if term < 1e-20 * total && n > 10 {
                break;
            }
            n += 1;
        }
        total * b.powi(8)
    }

    #[test]
    fn rejects_undersampled_traces() {
        assert!(matches!(
            ZeroSpanAnalyzer::new(&chain(1), 7.0e6),
            Err(Error::BandwidthMismatch { .. })
        ));
        assert!(ZeroSpanAnalyzer::new(&chain(1), 7.01e6).is_ok());
    }

    #[test]
    fn noise_gain_matches_closed_form() {
        let an = ZeroSpanAnalyzer::new(&chain(1), 16e6).unwrap();
        let oracle = cascade_norm_oracle(an.rbw_pole);
        assert!((an.noise_gain() - oracle).abs() / oracle < 1e-12);
        // -3 dB full width of the resolution filter equals the rbw
        let f = 150e3 / 16e6 * TAU;
        let one = {
            let (re, im) = (1.0 - an.rbw_pole * f.cos(), an.rbw_pole * f.sin());
            (1.0 - an.rbw_pole).powi(2) / (re * re + im * im)
        };
        assert!((one.powi(RBW_POLES as i32) - 0.5).abs() < 1e-3);
    }

    #[test]
    fn white_noise_reads_its_variance() {
        let an = ZeroSpanAnalyzer::new(&chain(50), 16e6).unwrap();
        let variance = 2.5;
        let trace = white(1 << 20, variance, 7);
        let out = an.analyze(&trace, an.noise_gain()).unwrap();
        assert!(
            (out.mean_snu - variance).abs() < 3.0 * out.std_error,
            "{} +- {}",
            out.mean_snu,
            out.std_error
        );
        // each smoothed point averages ~avg_count * interval samples
        let per_point =
            out.std_error * ((trace.len() as f64) / (50.0 * an.output_interval() as f64)).sqrt();
        let interior = &out.power_snu[25..out.power_snu.len() - 25];
        for p in interior {
            assert!((p - variance).abs() < 5.0 * per_point, "{p}");
        }
    }

    #[test]
    fn zero_input_reads_zero() {
        let an = ZeroSpanAnalyzer::new(&chain(50), 16e6).unwrap();
        let out = an.analyze(&vec![0.0; 100_000], 1.0).unwrap();
        assert!(out.power_snu.iter().all(|&p| p == 0.0));
        assert_eq!(out.mean_snu, 0.0);
    }

    #[test]
    fn averaging_reduces_point_scatter() {
        let trace = white(1 << 20, 1.0, 3);
        let spread = |avg| {
            let an = ZeroSpanAnalyzer::new(&chain(avg), 16e6).unwrap();
            let p = an.analyze(&trace, an.noise_gain()).unwrap().power_snu;
            let m = p.iter().sum::<f64>() / p.len() as f64;
            p.iter().map(|v| (v - m).powi(2)).sum::<f64>() / p.len() as f64
        };
        assert!(spread(1) > spread(50));
    }

    #[test]
    fn running_average_edges() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(running_average(&v, 1), v.to_vec());
        assert_eq!(running_average(&v, 3), vec![1.5, 2.0, 3.0, 4.0, 4.5]);
        let long = running_average(&v, 50);
        assert!(long.iter().all(|&x| (x - 3.0).abs() < 1e-12));
    }

    #[test]
    fn standard_error_is_calibrated() {
        // z-scores of independent estimates should have unit spread
        let an = ZeroSpanAnalyzer::new(&chain(1), 16e6).unwrap();
        let z: Vec<f64> = (0..200)
            .map(|seed| {
                let out = an
                    .analyze(&white(1 << 15, 1.0, 1000 + seed), an.noise_gain())
                    .unwrap();
                (out.mean_snu - 1.0) / out.std_error
            })
            .collect();
        let m = z.iter().sum::<f64>() / z.len() as f64;
        let sd = (z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (z.len() - 1) as f64).sqrt();
        assert!(m.abs() < 0.3, "mean z {m}");
        assert!((sd - 1.0).abs() < 0.15, "sd z {sd}");
    }
}
