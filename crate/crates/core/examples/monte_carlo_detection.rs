//! Simulates signal and idler photocurrents, combines them on a balanced
//! detector pair and compares the zero-span analyzer reading with the
//! closed-form variances.
//!
//! ```text
//! cargo run --release --example monte_carlo_detection
//! ```

use opo_noise::cavity::OperatingPoint;
use opo_noise::params::{Measurement, ParameterSet, DEFAULT_SEED};
use opo_noise::sim::{balanced_combine, simulate_photocurrents, CombineMode, ZeroSpanAnalyzer};
use opo_noise::variance::{
    correct_electronic_noise, single_beam_variance, twin_difference_variance, twin_sum_variance,
};

fn main() -> Result<(), opo_noise::Error> {
    let params = ParameterSet::paper_defaults();
    let cavity = params.cavity()?;
    let chain = params
        .detection_chain(Measurement::TwinBeam)?
        .with_cmrr_imbalance(0.0)?;
    let op = OperatingPoint::from_sigma(&cavity, 3.0, params.thresholds()[0], params.nu_det())?;
    let fs = 16e6;
    let pair = simulate_photocurrents(&cavity, &op, &chain, 0.0625, fs, DEFAULT_SEED)?;

    let analyzer = ZeroSpanAnalyzer::new(&chain, fs)?;
    let cal = analyzer.snl_calibration();
    let (r, eta, omega, sigma) = (cavity.coupling_ratio(), chain.eta, op.omega(), op.sigma());
    let expected = [
        twin_difference_variance(r, eta, omega)?.value_snu,
        twin_sum_variance(r, eta, omega, sigma)?.value_snu,
        single_beam_variance(r, eta, omega, sigma)?.value_snu,
    ];
    let traces = [
        (
            CombineMode::Difference,
            balanced_combine(
                &pair.signal_trace,
                &pair.idler_trace,
                CombineMode::Difference,
                &chain,
            ),
        ),
        (
            CombineMode::Sum,
            balanced_combine(
                &pair.signal_trace,
                &pair.idler_trace,
                CombineMode::Sum,
                &chain,
            ),
        ),
    ];
    println!(
        "{} samples at {} MHz, sigma = {sigma}, omega = {omega:.3}",
        pair.len(),
        fs / 1e6
    );
    println!(
        "electronic floor {:.0}% of SNL, removed before comparison",
        100.0 * chain.electronic_floor
    );
    let floor = chain.electronic_floor;
    let mut rows = Vec::new();
    for (mode, trace) in &traces {
        let snl = cal.power_per_dc * chain.combined_dc_weight(*mode);
        rows.push(analyzer.analyze(trace, snl)?);
    }
    rows.push(analyzer.analyze(&pair.signal_trace, cal.power_per_dc)?);
    for ((name, a), want) in ["difference", "sum", "single"]
        .iter()
        .zip(&rows)
        .zip(expected)
    {
        let got = correct_electronic_noise(a.mean_snu, floor)?;
        let se = a.std_error / (1.0 - floor);
        println!(
            "  {name:<10} {got:.4} +/- {se:.4} SNU, analytic {want:.4}, z = {:+.2}",
            (got - want) / se
        );
    }
    Ok(())
}
