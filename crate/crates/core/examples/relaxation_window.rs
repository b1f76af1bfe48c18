//! Relaxation-oscillation frequency of the triply resonant cavity and the
//! pump range over which it falls inside the cavity bandwidth.
//!
//! ```text
//! cargo run --example relaxation_window
//! ```

use opo_noise::variance::relaxation_frequency;

fn main() -> Result<(), opo_noise::Error> {
    let (gamma_p, gamma) = (30e6, 16e6 / 3.0);
    let info = relaxation_frequency(0.0, gamma_p, gamma)?;
    let (lo, hi) = info.in_band_window;
    println!(
        "gamma_p = {} MHz, gamma = {:.3} MHz",
        gamma_p / 1e6,
        gamma / 1e6
    );
    println!("oscillations start at sigma = {:.4}", info.sigma_threshold);
    println!("nu_N <= 1 for sigma in [{lo:.4}, {hi:.4}]");
    for sigma in [2.0, 2.4, 2.5, 2.7, 2.8, 3.0, 4.0] {
        match relaxation_frequency(sigma, gamma_p, gamma)?.nu_n {
            Some(nu) => println!(
                "  sigma {sigma:.2}: nu_N = {nu:.4}{}",
                if nu <= 1.0 { "  (in band)" } else { "" }
            ),
            None => println!("  sigma {sigma:.2}: below threshold"),
        }
    }
    Ok(())
}
