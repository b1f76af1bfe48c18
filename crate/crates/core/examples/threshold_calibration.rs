//! Calibrates the threshold scaling constant from one measured threshold and
//! predicts thresholds for other couplings and pump parameters.
//!
//! ```text
//! cargo run --example threshold_calibration
//! ```

use opo_noise::cavity::{
    calibrate_threshold_constant, pump_parameter, threshold_power, CavityParams,
};
use opo_noise::params::{MHZ, UW};

fn main() -> Result<(), opo_noise::Error> {
    let cavity = CavityParams::from_coupling_ratio(30.0 * MHZ, 15.0 * MHZ, 16.0 * MHZ / 3.0, 0.22)?;
    let k = calibrate_threshold_constant(12.3 * UW, cavity.gamma_p(), cavity.gamma())?;
    println!("coupling regime: {:?}", cavity.coupling_regime());
    println!("calibrated constant: {k:.4e} W/Hz^3");
    for gamma_mhz in [4.0, 16.0 / 3.0, 8.0] {
        let p = threshold_power(k, cavity.gamma_p(), gamma_mhz * MHZ)?;
        println!("  gamma = {gamma_mhz:.3} MHz -> P_th = {:.2} uW", p / UW);
    }
    for pump_uw in [12.3, 49.2, 400.0] {
        println!(
            "  P = {pump_uw} uW -> sigma = {:.4}",
            pump_parameter(pump_uw * UW, 12.3 * UW)?
        );
    }
    Ok(())
}
