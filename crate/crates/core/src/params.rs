//! JSON parameter sets with explicit units in every key.
//!
//! Files use MHz, kHz, ms and uW because that is how the experiment is
//! described; everything is converted to Hz, s and W on the way in.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::error::{invalid, Result};
use crate::sim::{DetectionChain, PdcChannel, SweepConfig, SweepMode};

pub const MHZ: f64 = 1e6;
pub const KHZ: f64 = 1e3;
pub const UW: f64 = 1e-6;
pub const MS: f64 = 1e-3;

/// Seed used whenever the caller does not provide one.
pub const DEFAULT_SEED: u64 = 20_100_913;

const PAPER_DEFAULTS: &str = include_str!("../presets/paper-defaults.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavitySection {
    #[serde(rename = "gamma_p_MHz")]
    pub gamma_p_mhz: f64,
    #[serde(rename = "gamma_p0_MHz")]
    pub gamma_p0_mhz: f64,
    #[serde(rename = "gamma_MHz")]
    pub gamma_mhz: f64,
    pub coupling_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSection {
    #[serde(rename = "rbw_kHz")]
    pub rbw_khz: f64,
    #[serde(rename = "vbw_kHz")]
    pub vbw_khz: f64,
    pub avg_count: usize,
    pub cmrr_imbalance: f64,
    pub electronic_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSection {
    #[serde(rename = "center_MHz")]
    pub center_mhz: f64,
    pub sigma: f64,
    #[serde(rename = "width_MHz")]
    pub width_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub sweep_time_ms: f64,
    pub points: usize,
    #[serde(rename = "span_MHz")]
    pub span_mhz: f64,
    #[serde(rename = "sample_rate_MHz")]
    pub sample_rate_mhz: f64,
    pub twin_channels: Vec<ChannelSection>,
    pub single_channels: Vec<ChannelSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub name: String,
    pub cavity: CavitySection,
    #[serde(rename = "nu_det_MHz")]
    pub nu_det_mhz: f64,
    pub eta_twin: f64,
    pub eta_single: f64,
    #[serde(rename = "threshold_uW_options")]
    pub threshold_uw_options: Vec<f64>,
    pub detection: DetectionSection,
    pub sweep: SweepSection,
}

/// Which detection setup a chain is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    TwinBeam,
    SingleBeam,
}

impl ParameterSet {
    pub fn paper_defaults() -> Self {
        serde_json::from_str(PAPER_DEFAULTS).expect("bundled preset is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// `paper-defaults` resolves to the bundled preset, anything else is a path.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if name_or_path == "paper-defaults" {
            Ok(Self::paper_defaults())
        } else {
            Self::load(name_or_path)
        }
    }

    pub fn cavity(&self) -> Result<CavityParams> {
        let c = &self.cavity;
        CavityParams::from_coupling_ratio(
            c.gamma_p_mhz * MHZ,
            c.gamma_p0_mhz * MHZ,
            c.gamma_mhz * MHZ,
            c.coupling_ratio,
        )
    }

    pub fn nu_det(&self) -> f64 {
        self.nu_det_mhz * MHZ
    }

    pub fn eta(&self, measurement: Measurement) -> f64 {
        match measurement {
            Measurement::TwinBeam => self.eta_twin,
            Measurement::SingleBeam => self.eta_single,
        }
    }

    /// Thresholds in W.
    pub fn thresholds(&self) -> Vec<f64> {
        self.threshold_uw_options.iter().map(|p| p * UW).collect()
    }

    pub fn detection_chain(&self, measurement: Measurement) -> Result<DetectionChain> {
        let d = &self.detection;
        DetectionChain::new(
            self.eta(measurement),
            d.cmrr_imbalance,
            d.electronic_floor,
            d.rbw_khz * KHZ,
            d.vbw_khz * KHZ,
            d.avg_count,
            self.nu_det(),
        )
    }

    pub fn sweep_config(
        &self,
        measurement: Measurement,
        mode: SweepMode,
        seed: u64,
    ) -> Result<SweepConfig> {
        let s = &self.sweep;
        let channels = match measurement {
            Measurement::TwinBeam => &s.twin_channels,
            Measurement::SingleBeam => &s.single_channels,
        };
        if s.points == 0 {
            return Err(invalid("points", "sweep needs at least one point"));
        }
        Ok(SweepConfig {
            channels: channels
                .iter()
                .map(|c| PdcChannel {
                    center: c.center_mhz * MHZ,
                    sigma: c.sigma,
                    width: c.width_mhz * MHZ,
                })
                .collect(),
            span: s.span_mhz * MHZ,
            points: s.points,
            sweep_time: s.sweep_time_ms * MS,
            sample_rate: s.sample_rate_mhz * MHZ,
            mode,
            seed,
        })
    }
}
