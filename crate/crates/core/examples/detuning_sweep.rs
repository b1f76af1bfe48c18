//! Pump-detuning sweep over three PDC channels, printed as CSV.
//!
//! ```text
//! cargo run --release --example detuning_sweep [-- monte-carlo]
//! ```

use opo_noise::params::{Measurement, ParameterSet, DEFAULT_SEED};
use opo_noise::sim::io::sweep_to_csv;
use opo_noise::sim::{detuning_sweep, SweepMode};
use opo_noise::variance::{correct_electronic_noise, to_db};

fn main() -> Result<(), opo_noise::Error> {
    let mode = match std::env::args().nth(1).as_deref() {
        Some("monte-carlo") => SweepMode::MonteCarlo,
        _ => SweepMode::Expected,
    };
    let params = ParameterSet::paper_defaults();
    let cavity = params.cavity()?;
    let chain = params.detection_chain(Measurement::TwinBeam)?;
    let config = params.sweep_config(Measurement::TwinBeam, mode, DEFAULT_SEED)?;
    let trace = detuning_sweep(&cavity, &chain, &config)?;

    let min = trace
        .noise_diff
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let max_sum = trace.noise_sum.iter().cloned().fold(0.0, f64::max);
    let corrected = correct_electronic_noise(min, chain.electronic_floor)?;
    eprintln!(
        "difference minimum {min:.4} SNU, corrected {corrected:.4} SNU ({:+.2} dB)",
        to_db(corrected)?
    );
    eprintln!("sum maximum {max_sum:.4} SNU");
    print!("{}", sweep_to_csv(&trace));
    Ok(())
}
