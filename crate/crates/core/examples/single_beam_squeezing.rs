//! Single-beam intensity noise versus pump power: excess noise near
//! threshold, the SNL crossing at four times threshold, and the asymptote.
//!
//! ```text
//! cargo run --example single_beam_squeezing
//! ```

use opo_noise::variance::{single_beam_asymptote, single_beam_variance};

fn main() -> Result<(), opo_noise::Error> {
    let (ratio, eta, omega) = (0.22, 0.73, 0.6);
    let p_th_uw = 12.3;
    println!("gamma0/gamma = {ratio}, eta = {eta}, omega = {omega}, P_th = {p_th_uw} uW");
    println!(
        "{:>10}  {:>6}  {:>10}  {:>8}",
        "P [uW]", "sigma", "V [SNU]", "[dB]"
    );
    for p in [13.0, 15.0, 25.0, 49.2, 100.0, 200.0, 400.0, 1000.0] {
        let sigma = f64::sqrt(p / p_th_uw);
        let v = single_beam_variance(ratio, eta, omega, sigma)?;
        println!(
            "{p:>10.1}  {sigma:>6.3}  {:>10.5}  {:>+8.3}",
            v.value_snu, v.value_db
        );
    }
    let asym = single_beam_asymptote(ratio, eta, omega)?;
    println!(
        "far above threshold: {:.5} SNU ({:+.3} dB)",
        asym.value_snu, asym.value_db
    );
    let ideal = single_beam_asymptote(1.0, 1.0, 0.0)?;
    println!(
        "ideal limit (eta = 1, gamma0 = gamma, omega = 0): {:.3} SNU",
        ideal.value_snu
    );
    Ok(())
}
