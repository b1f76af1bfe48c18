//! Detection-chain emulation: photocurrent synthesis, balanced detection,
//! zero-span analysis and pump-detuning sweeps.

mod analyzer;
mod detection;
pub mod io;
mod photocurrent;
mod sweep;

pub use analyzer::{zero_span_analyze, ZeroSpanAnalyzer, ZeroSpanTrace};
pub use detection::{
    balanced_combine, shot_noise_reference, CombineMode, DetectionChain, SnlCalibration,
};
pub use photocurrent::{
    sample_count, simulate_attenuated_photocurrents, simulate_photocurrents, PhotocurrentPair,
    SEGMENT_LEN,
};
pub use sweep::{detuning_sweep, ChannelMarker, PdcChannel, SweepConfig, SweepMode, SweepTrace};
