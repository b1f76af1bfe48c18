//! Writes a synthetic single-beam noise dataset in the format read by
//! `opo-noise fit`: 20 powers spaced geometrically over 15..500 uW,
//! P_th = 12.3 uW, prefactor 0.1606, omega 0.6, Gaussian noise sd 0.02 SNU.
//!
//! ```text
//! cargo run --example make_synthetic_dataset -- [out.csv] [seed]
//! ```
//!
//! The bundled `data/single-beam-synthetic.csv` was produced with the
//! default seed (`opo_noise::params::DEFAULT_SEED`).

use opo_noise::fit::{geometric_powers, synthetic_single_beam_data};
use opo_noise::params::{DEFAULT_SEED, UW};
use opo_noise::table::{Cell, Table};

fn main() -> Result<(), opo_noise::Error> {
    let mut args = std::env::args().skip(1);
    let out = args.next();
    let seed = args
        .next()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED);

    let powers = geometric_powers(15.0 * UW, 500.0 * UW, 20);
    let data = synthetic_single_beam_data(12.3 * UW, 0.1606, 0.6, 0.02, &powers, seed)?;
    let mut table = Table::new(["power_uW", "variance_snu"]);
    for d in &data {
        table.push(vec![Cell::Value(d.power / UW), Cell::Value(d.variance)]);
    }
    match out {
        Some(path) => std::fs::write(path, table.to_csv())?,
        None => print!("{}", table.to_csv()),
    }
    Ok(())
}
