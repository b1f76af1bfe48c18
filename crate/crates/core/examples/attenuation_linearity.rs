//! Inserts an attenuator before detection and shows that the measured
//! difference variance moves along 1 + T (V - 1).
//!
//! ```text
//! cargo run --release --example attenuation_linearity
//! ```

use opo_noise::cavity::{CavityParams, OperatingPoint};
use opo_noise::params::DEFAULT_SEED;
use opo_noise::sim::{
    balanced_combine, simulate_attenuated_photocurrents, CombineMode, DetectionChain,
    ZeroSpanAnalyzer,
};
use opo_noise::variance::{apply_passive_loss, correct_electronic_noise, twin_difference_variance};

fn main() -> Result<(), opo_noise::Error> {
    let cavity = CavityParams::from_coupling_ratio(30e6, 15e6, 16e6 / 3.0, 0.5)?;
    let chain = DetectionChain::new(1.0, 0.0, 0.02, 300e3, 10e3, 50, 3.2e6)?;
    let op = OperatingPoint::from_sigma(&cavity, 3.0, 12.3e-6, 3.2e6)?;
    let fs = 16e6;
    let v = twin_difference_variance(0.5, 1.0, op.omega())?.value_snu;
    let analyzer = ZeroSpanAnalyzer::new(&chain, fs)?;
    let snl =
        analyzer.snl_calibration().power_per_dc * chain.combined_dc_weight(CombineMode::Difference);

    let mut points = Vec::new();
    println!("V(T = 1) analytic {v:.4} SNU");
    for t in [0.25, 0.5, 0.75, 1.0] {
        let pair =
            simulate_attenuated_photocurrents(&cavity, &op, &chain, 0.5, fs, DEFAULT_SEED, t)?;
        let diff = balanced_combine(
            &pair.signal_trace,
            &pair.idler_trace,
            CombineMode::Difference,
            &chain,
        );
        let a = analyzer.analyze(&diff, snl)?;
        let measured = correct_electronic_noise(a.mean_snu, chain.electronic_floor)?;
        println!(
            "  T = {t:.2}: measured {measured:.4}, expected {:.4}",
            apply_passive_loss(v, t)?
        );
        points.push((t, measured));
    }
    let slope = points.iter().map(|(t, m)| t * (m - 1.0)).sum::<f64>()
        / points.iter().map(|(t, _)| t * t).sum::<f64>();
    println!(
        "fitted slope {slope:.4}, V - 1 = {:.4}, ratio {:.4}",
        v - 1.0,
        slope / (v - 1.0)
    );
    Ok(())
}
