//! Fits threshold power and squeezing prefactor to synthetic single-beam data,
//! then repeats the fit over many noise realizations.
//!
//! ```text
//! cargo run --release --example fit_threshold [-- <seeds>]
//! ```

use opo_noise::fit::{
    fit_single_beam_noise, geometric_powers, synthetic_single_beam_data, FitConfig,
};
use opo_noise::params::UW;
use opo_noise::Error;

const P_TH: f64 = 12.3 * UW;
const PREFACTOR: f64 = 0.1606;
const OMEGA: f64 = 0.6;
const NOISE_SD: f64 = 0.02;

fn main() -> Result<(), Error> {
    let seeds: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let powers = geometric_powers(15.0 * UW, 500.0 * UW, 20);
    let true_asymptote = 1.0 - PREFACTOR / (2.0 * (1.0 + OMEGA * OMEGA));
    let config = FitConfig::default();

    let data = synthetic_single_beam_data(P_TH, PREFACTOR, OMEGA, NOISE_SD, &powers, 0)?;
    let fit = fit_single_beam_noise(&data, OMEGA, &config)?;
    println!("seed 0:");
    println!(
        "  P_th      = {:.3} +/- {:.3} uW   (true {:.3})",
        fit.p_th_hat / UW,
        fit.p_th_sd.unwrap_or(f64::NAN) / UW,
        P_TH / UW
    );
    println!(
        "  asymptote = {:.4} +/- {:.4} SNU (true {:.4})",
        fit.asymptote_hat,
        fit.asymptote_sd.unwrap_or(f64::NAN),
        true_asymptote
    );
    println!(
        "  SNL crossing at {:.2} x P_th, {} iterations",
        crossing(&fit) / fit.p_th_hat,
        fit.iterations
    );

    let (mut p_ok, mut a_ok, mut both, mut failed) = (0, 0, 0, 0);
    let mut p_err = Vec::new();
    for seed in 0..seeds {
        let data = synthetic_single_beam_data(P_TH, PREFACTOR, OMEGA, NOISE_SD, &powers, seed)?;
        match fit_single_beam_noise(&data, OMEGA, &config) {
            Ok(fit) => {
                let p_rel = fit.p_th_hat / P_TH - 1.0;
                let pass_p = p_rel.abs() <= 0.05;
                let pass_a = (fit.asymptote_hat - true_asymptote).abs() <= 0.02;
                p_ok += pass_p as usize;
                a_ok += pass_a as usize;
                both += (pass_p && pass_a) as usize;
                p_err.push(p_rel);
            }
            Err(_) => failed += 1,
        }
    }
    let n = p_err.len() as f64;
    let sd = (p_err.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    println!("{seeds} seeds:");
    println!("  P_th within 5%:          {p_ok}");
    println!("  asymptote within 0.02:   {a_ok}");
    println!("  both:                    {both}");
    println!("  fit errors:              {failed}");
    println!("  rms relative P_th error: {:.2}%", 100.0 * sd);
    Ok(())
}

/// Pump power where the fitted curve crosses the SNL, by bisection.
fn crossing(fit: &opo_noise::FitResult) -> f64 {
    let (mut lo, mut hi) = (fit.p_th_hat * 1.0001, fit.p_th_hat * 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fit.model(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
