//! Twin-beam difference and sum variances versus pump parameter for a weakly
//! and a critically coupled cavity.
//!
//! ```text
//! cargo run --example twin_beam_variances
//! ```

use opo_noise::variance::{twin_difference_variance, twin_sum_variance};

fn main() -> Result<(), opo_noise::Error> {
    let omega = 0.6;
    for (label, ratio, eta) in [
        ("weak coupling", 0.22, 0.87),
        ("critical coupling", 0.5, 1.0),
    ] {
        let diff = twin_difference_variance(ratio, eta, omega)?;
        println!("{label}: gamma0/gamma = {ratio}, eta = {eta}, omega = {omega}");
        println!(
            "  difference: {:.4} SNU ({:+.2} dB) at every sigma",
            diff.value_snu, diff.value_db
        );
        println!("  {:>6}  {:>10}  {:>8}", "sigma", "sum [SNU]", "[dB]");
        for sigma in [1.1, 1.5, 2.0, 3.0, 5.0, 10.0] {
            let sum = twin_sum_variance(ratio, eta, omega, sigma)?;
            println!(
                "  {sigma:>6.1}  {:>10.4}  {:>+8.2}",
                sum.value_snu, sum.value_db
            );
        }
    }
    Ok(())
}
