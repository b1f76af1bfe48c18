//! Quantum-noise model and detection-chain emulator for a triply resonant
//! optical parametric oscillator above threshold.
//!
//! - [`cavity`]: cavity rates, pump parameter, sideband normalization.
//! - [`variance`]: closed-form twin-beam and single-beam variances.
//! - [`sim`]: photocurrent synthesis, balanced detection, spectrum analysis.
//! - [`fit`]: threshold and squeezing estimation from measured data.
//! - [`commands`]: the command-line front end.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cavity;
pub mod commands;
pub mod error;
pub mod fit;
pub mod params;
pub mod sim;
pub mod table;
pub mod variance;

pub use cavity::{CavityParams, CouplingRegime, OperatingPoint};
pub use error::{Error, Result};
pub use fit::{fit_single_beam_noise, DataPoint, FitConfig, FitResult};
pub use params::{Measurement, ParameterSet};
pub use variance::{ChannelKind, NoiseResult, RelaxationInfo};
