//! CSV and JSON serialization of sweep traces and photocurrent records.
//!
//! Floats are written in shortest round-trip form so files re-parse to the
//! exact values that were written.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::detection::DetectionChain;
use super::photocurrent::PhotocurrentPair;
use super::sweep::{SweepConfig, SweepTrace};
use crate::cavity::{CavityParams, OperatingPoint};
use crate::error::{invalid, Result};
use crate::table::read_numeric_csv;

pub const SWEEP_CSV_COLUMNS: [&str; 5] =
    ["detuning", "snl", "noise_diff", "noise_sum", "noise_single"];
pub const PHOTOCURRENT_CSV_COLUMNS: [&str; 3] = ["index", "signal", "idler"];

/// The five CSV columns of a sweep, in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepColumns {
    pub detuning: Vec<f64>,
    pub snl: Vec<f64>,
    pub noise_diff: Vec<f64>,
    pub noise_sum: Vec<f64>,
    pub noise_single: Vec<f64>,
}

impl From<&SweepTrace> for SweepColumns {
    fn from(t: &SweepTrace) -> Self {
        Self {
            detuning: t.detuning.clone(),
            snl: t.snl.clone(),
            noise_diff: t.noise_diff.clone(),
            noise_sum: t.noise_sum.clone(),
            noise_single: t.noise_single.clone(),
        }
    }
}

pub fn sweep_to_csv(trace: &SweepTrace) -> String {
    let mut out = SWEEP_CSV_COLUMNS.join(",");
    out.push('\n');
    for k in 0..trace.len() {
        let row = [
            trace.detuning[k],
            trace.snl[k],
            trace.noise_diff[k],
            trace.noise_sum[k],
            trace.noise_single[k],
        ];
        out.push_str(&join_floats(&row));
        out.push('\n');
    }
    out
}

pub fn sweep_from_csv(text: &str) -> Result<SweepColumns> {
    let rows = read_numeric_csv(text, Path::new("<sweep>"), &SWEEP_CSV_COLUMNS, &[])?;
    let col = |c: usize| rows.iter().map(|r| r[c].unwrap_or(f64::NAN)).collect();
    Ok(SweepColumns {
        detuning: col(0),
        snl: col(1),
        noise_diff: col(2),
        noise_sum: col(3),
        noise_single: col(4),
    })
}

/// A sweep together with everything needed to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub cavity: CavityParams,
    pub chain: DetectionChain,
    pub config: SweepConfig,
    pub trace: SweepTrace,
}

impl SweepDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn photocurrents_to_csv(pair: &PhotocurrentPair) -> String {
    let mut out = String::with_capacity(pair.len() * 48);
    out.push_str(&PHOTOCURRENT_CSV_COLUMNS.join(","));
    out.push('\n');
    for (k, (s, i)) in pair.signal_trace.iter().zip(&pair.idler_trace).enumerate() {
        out.push_str(&format!("{k},{s},{i}\n"));
    }
    out
}

/// Parses the CSV form back; the record metadata is not stored in the CSV.
pub fn photocurrents_from_csv(
    text: &str,
    sample_rate: f64,
    duration: f64,
    seed: u64,
) -> Result<PhotocurrentPair> {
    let rows = read_numeric_csv(
        text,
        Path::new("<photocurrents>"),
        &PHOTOCURRENT_CSV_COLUMNS,
        &[],
    )?;
    let mut signal_trace = Vec::with_capacity(rows.len());
    let mut idler_trace = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter().enumerate() {
        if r[0] != Some(k as f64) {
            return Err(invalid(
                "index",
                format!("row {k} carries index {:?}", r[0]),
            ));
        }
        signal_trace.push(r[1].unwrap_or(f64::NAN));
        idler_trace.push(r[2].unwrap_or(f64::NAN));
    }
    Ok(PhotocurrentPair {
        sample_rate,
        duration,
        seed,
        signal_trace,
        idler_trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotocurrentDocument {
    pub cavity: CavityParams,
    pub operating_point: OperatingPoint,
    pub chain: DetectionChain,
    pub pair: PhotocurrentPair,
}

impl PhotocurrentDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn sweep_csv_round_trip(values in proptest::collection::vec(
            (-1e8f64..1e8, 1e-6f64..10.0, 1e-3f64..10.0, 1e-3f64..100.0, 1e-3f64..10.0), 0..40)
        ) {
            let trace = SweepTrace {
                detuning: values.iter().map(|v| v.0).collect(),
                snl: values.iter().map(|v| v.1).collect(),
                noise_diff: values.iter().map(|v| v.2).collect(),
                noise_sum: values.iter().map(|v| v.3).collect(),
                noise_single: values.iter().map(|v| v.4).collect(),
                pump_transmission: vec![1.0; values.len()],
                sigma: vec![0.0; values.len()],
                channel_markers: vec![],
            };
            let back = sweep_from_csv(&sweep_to_csv(&trace)).unwrap();
            prop_assert_eq!(back, SweepColumns::from(&trace));
        }

        #[test]
        fn photocurrent_csv_round_trip(s in proptest::collection::vec(-10f64..10.0, 0..50)) {
            let pair = PhotocurrentPair {
                sample_rate: 16e6, duration: 1e-3, seed: 9,
                idler_trace: s.iter().map(|v| -v * 0.5).collect(),
                signal_trace: s,
            };
            let back = photocurrents_from_csv(&photocurrents_to_csv(&pair), 16e6, 1e-3, 9).unwrap();
            prop_assert_eq!(back, pair);
        }
    }

    #[test]
    fn header_order_is_fixed() {
        let csv = sweep_to_csv(&SweepTrace {
            detuning: vec![1.0],
            snl: vec![1.0],
            noise_diff: vec![0.9],
            noise_sum: vec![1.1],
            noise_single: vec![1.0],
            pump_transmission: vec![1.0],
            sigma: vec![0.0],
            channel_markers: vec![],
        });
        assert_eq!(
            csv.lines().next().unwrap(),
            "detuning,snl,noise_diff,noise_sum,noise_single"
        );
        assert_eq!(csv.lines().nth(1).unwrap(), "1,1,0.9,1.1,1");
    }
}
