//! Monte-Carlo realization of the signal and idler photocurrent fluctuations.
//!
//! Samples are in units where one beam's shot noise has unit variance. The
//! pair is built from two independent normals `u`, `w` as
//! `s = a u + b w`, `i = a u - b w` with `a^2 = V+/2`, `b^2 = V-/2`, so the
//! normalized sum and difference carry exactly the twin-beam variances and
//! each beam alone carries their mean, which is the single-beam variance.
//! The spectrum is flat, so the analyzer sees these variances at any center
//! frequency.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::detection::DetectionChain;
use crate::cavity::{CavityParams, OperatingPoint};
use crate::error::{check_positive, check_range, Error, Result};
use crate::variance::{twin_difference_variance, twin_sum_variance};

/// Samples per RNG substream. Substream `k` always covers samples
/// `k * SEGMENT_LEN .. (k + 1) * SEGMENT_LEN`, whatever the thread count.
pub const SEGMENT_LEN: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotocurrentPair {
    pub sample_rate: f64,
    pub duration: f64,
    pub seed: u64,
    pub signal_trace: Vec<f64>,
    pub idler_trace: Vec<f64>,
}

impl PhotocurrentPair {
    pub fn len(&self) -> usize {
        self.signal_trace.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal_trace.is_empty()
    }
}

/// Number of samples in a record: `floor(sample_rate * duration)`, with a
/// relative guard against products like 999999.9999999.
pub fn sample_count(sample_rate: f64, duration: f64) -> usize {
    let exact = sample_rate * duration;
    (exact * (1.0 + 4.0 * f64::EPSILON)).floor() as usize
}

/// Per-sample mixing coefficients of the two underlying normals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PairShape {
    pub common: f64,
    pub differential: f64,
}

impl PairShape {
    pub fn from_variances(v_minus: f64, v_plus: f64) -> Self {
        Self {
            common: (0.5 * v_plus).sqrt(),
            differential: (0.5 * v_minus).sqrt(),
        }
    }

    pub const SHOT_NOISE: Self = Self {
        common: std::f64::consts::FRAC_1_SQRT_2,
        differential: std::f64::consts::FRAC_1_SQRT_2,
    };
}

/// Fills the two traces segment by segment. `shape(k)` gives the mixing
/// coefficients of sample `k`; `transmission` mixes in vacuum before the
/// electronic noise (standard deviation `electronic_sd`) is added.
pub(crate) fn synthesize<F>(
    n: usize,
    seed: u64,
    transmission: f64,
    electronic_sd: f64,
    shape: F,
) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(usize) -> PairShape + Sync,
{
    let mut signal = vec![0.0; n];
    let mut idler = vec![0.0; n];
    let keep = transmission.sqrt();
    let vacuum = (1.0 - transmission).sqrt();
    signal
        .par_chunks_mut(SEGMENT_LEN)
        .zip(idler.par_chunks_mut(SEGMENT_LEN))
        .enumerate()
        .for_each(|(segment, (s_chunk, i_chunk))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(segment as u64);
            let offset = segment * SEGMENT_LEN;
            for (k, (s, i)) in s_chunk.iter_mut().zip(i_chunk.iter_mut()).enumerate() {
                // six draws per sample regardless of parameters, so changing
                // the transmission or floor reuses the same realization
                let draws: [f64; 6] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
                let PairShape {
                    common,
                    differential,
                } = shape(offset + k);
                let a = common * draws[0];
                let b = differential * draws[1];
                *s = keep * (a + b) + vacuum * draws[2] + electronic_sd * draws[4];
                *i = keep * (a - b) + vacuum * draws[3] + electronic_sd * draws[5];
            }
        });
    (signal, idler)
}

/// Photocurrent fluctuations of the two parametric beams at a fixed operating point.
pub fn simulate_photocurrents(
    cavity: &CavityParams,
    op: &OperatingPoint,
    chain: &DetectionChain,
    duration: f64,
    sample_rate: f64,
    seed: u64,
) -> Result<PhotocurrentPair> {
    simulate_attenuated_photocurrents(cavity, op, chain, duration, sample_rate, seed, 1.0)
}

/// As [`simulate_photocurrents`], with an optical attenuator of power
/// transmission `transmission` in front of both detectors. For a fixed seed
/// the underlying realization does not depend on `transmission`.
pub fn simulate_attenuated_photocurrents(
    cavity: &CavityParams,
    op: &OperatingPoint,
    chain: &DetectionChain,
    duration: f64,
    sample_rate: f64,
    seed: u64,
    transmission: f64,
) -> Result<PhotocurrentPair> {
    chain.validate()?;
    check_positive("duration", duration)?;
    check_positive("sample_rate", sample_rate)?;
    check_range("transmission", transmission, 0.0, 1.0)?;
    let required = 4.0 * chain.nu_center;
    if sample_rate <= required {
        return Err(Error::BandwidthMismatch {
            sample_rate,
            required,
        });
    }
    let ratio = cavity.coupling_ratio();
    let v_minus = twin_difference_variance(ratio, chain.eta, op.omega())?.value_snu;
    let v_plus = twin_sum_variance(ratio, chain.eta, op.omega(), op.sigma())?.value_snu;
    let shape = PairShape::from_variances(v_minus, v_plus);
    let n = sample_count(sample_rate, duration);
    let (signal_trace, idler_trace) = synthesize(
        n,
        seed,
        transmission,
        chain.electronic_variance().sqrt(),
        |_| shape,
    );
    Ok(PhotocurrentPair {
        sample_rate,
        duration,
        seed,
        signal_trace,
        idler_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (CavityParams, OperatingPoint, DetectionChain) {
        let cavity = CavityParams::from_coupling_ratio(30e6, 15e6, 3.2e6 / 0.6, 0.22).unwrap();
        let op = OperatingPoint::from_sigma(&cavity, 1.2, 12.3e-6, 3.2e6).unwrap();
        let chain = DetectionChain::new(0.87, 0.01, 0.02, 300e3, 10e3, 50, 3.2e6).unwrap();
        (cavity, op, chain)
    }

    #[test]
    fn lengths_follow_floor_rule() {
        assert_eq!(sample_count(16e6, 0.0625), 1_000_000);
        assert_eq!(sample_count(16e6, 1e-3), 16_000);
        assert_eq!(sample_count(3.0, 0.5), 1);
        let (c, op, ch) = setup();
        let pair = simulate_photocurrents(&c, &op, &ch, 1.03e-4, 16e6, 1).unwrap();
        assert_eq!(pair.signal_trace.len(), 1648);
        assert_eq!(pair.idler_trace.len(), pair.signal_trace.len());
    }

    #[test]
    fn same_seed_same_bits() {
        let (c, op, ch) = setup();
        let a = simulate_photocurrents(&c, &op, &ch, 0.01, 16e6, 99).unwrap();
        let b = simulate_photocurrents(&c, &op, &ch, 0.01, 16e6, 99).unwrap();
        assert_eq!(a, b);
        let other = simulate_photocurrents(&c, &op, &ch, 0.01, 16e6, 100).unwrap();
        assert_ne!(a.signal_trace, other.signal_trace);
    }

    #[test]
    fn independent_of_thread_count() {
        let (c, op, ch) = setup();
        let reference = simulate_photocurrents(&c, &op, &ch, 0.02, 16e6, 5).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial =
            single.install(|| simulate_photocurrents(&c, &op, &ch, 0.02, 16e6, 5).unwrap());
        assert_eq!(reference, serial);
    }

    #[test]
    fn full_transmission_is_the_plain_simulation() {
        let (c, op, ch) = setup();
        let plain = simulate_photocurrents(&c, &op, &ch, 0.005, 16e6, 3).unwrap();
        let att = simulate_attenuated_photocurrents(&c, &op, &ch, 0.005, 16e6, 3, 1.0).unwrap();
        assert_eq!(plain, att);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (c, _, ch) = setup();
        let pole_chain = ch;
        let at_threshold = OperatingPoint::from_sigma(&c, 1.0, 12.3e-6, 0.0).unwrap();
        assert!(matches!(
            simulate_photocurrents(&c, &at_threshold, &pole_chain, 0.001, 16e6, 1),
            Err(Error::Divergence { .. })
        ));
        let below = OperatingPoint::from_sigma(&c, 0.8, 12.3e-6, 3.2e6).unwrap();
        assert!(simulate_photocurrents(&c, &below, &ch, 0.001, 16e6, 1).is_err());
        let (_, op, _) = setup();
        assert!(matches!(
            simulate_photocurrents(&c, &op, &ch, 0.001, 12.8e6, 1),
            Err(Error::BandwidthMismatch { .. })
        ));
    }
}
