//! Command-line front end.
//!
//! Parameter precedence, lowest first: the bundled `paper-defaults` preset,
//! the file named by `--params`, then individual flags. Every output file is
//! written to a temporary sibling and renamed into place, so a failed run
//! leaves no partial files behind.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::cavity::OperatingPoint;
use crate::error::{invalid, Error, Result};
use crate::fit::{fit_single_beam_noise, DataPoint, FitConfig, FitResult};
use crate::params::{Measurement, ParameterSet, DEFAULT_SEED, MHZ, MS, UW};
use crate::sim::io::{sweep_to_csv, PhotocurrentDocument, SweepDocument};
use crate::sim::{
    balanced_combine, detuning_sweep, simulate_attenuated_photocurrents, CombineMode, PdcChannel,
    SweepMode, ZeroSpanAnalyzer,
};
use crate::table::{format_sig9, read_numeric_csv, rounded_json, Cell, Marker, Table};
use crate::variance::{
    relaxation_frequency, single_beam_variance, to_db, twin_difference_variance, twin_sum_variance,
};

#[derive(Debug, Parser)]
#[command(
    name = "opo-noise",
    version,
    about = "Intensity-noise model and detection emulator for a triply resonant OPO"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate twin-beam and single-beam variances on a sigma or omega grid.
    Variance(VarianceArgs),
    /// Sweep the pump detuning across the resonance.
    Sweep(SweepArgs),
    /// Synthesize signal and idler photocurrents at one operating point.
    Simulate(SimulateArgs),
    /// Fit threshold power and squeezing prefactor to single-beam data.
    Fit(FitArgs),
    /// Tabulate the relaxation-oscillation frequency and its in-band window.
    Relax(RelaxArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasurementArg {
    Twin,
    Single,
}

impl From<MeasurementArg> for Measurement {
    fn from(m: MeasurementArg) -> Self {
        match m {
            MeasurementArg::Twin => Measurement::TwinBeam,
            MeasurementArg::Single => Measurement::SingleBeam,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Parameter file, or `paper-defaults` for the bundled preset.
    #[arg(long, default_value = "paper-defaults")]
    pub params: String,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

/// Flags overriding individual model parameters.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelOverrides {
    #[arg(long = "gamma-MHz")]
    pub gamma_mhz: Option<f64>,
    #[arg(long = "gamma-p-MHz")]
    pub gamma_p_mhz: Option<f64>,
    #[arg(long = "gamma-p0-MHz")]
    pub gamma_p0_mhz: Option<f64>,
    /// Signal/idler coupling ratio gamma0/gamma.
    #[arg(long)]
    pub coupling_ratio: Option<f64>,
    /// Analysis frequency (sideband) of the detection.
    #[arg(long = "nu-det-MHz")]
    pub nu_det_mhz: Option<f64>,
    #[arg(long)]
    pub eta_twin: Option<f64>,
    #[arg(long)]
    pub eta_single: Option<f64>,
    /// Threshold power; replaces the preset's threshold list.
    #[arg(long = "threshold-uW")]
    pub threshold_uw: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DetectionOverrides {
    #[arg(long = "rbw-kHz")]
    pub rbw_khz: Option<f64>,
    #[arg(long = "vbw-kHz")]
    pub vbw_khz: Option<f64>,
    #[arg(long)]
    pub avg_count: Option<usize>,
    /// Detector gain imbalance epsilon.
    #[arg(long)]
    pub cmrr_imbalance: Option<f64>,
    /// Electronic noise as a fraction of the measured SNL.
    #[arg(long)]
    pub electronic_floor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridAxis {
    Sigma,
    Omega,
}

#[derive(Debug, Clone, Args)]
pub struct VarianceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelOverrides,
    #[arg(long, value_enum, default_value_t = GridAxis::Sigma)]
    pub grid: GridAxis,
    #[arg(long)]
    pub min: Option<f64>,
    #[arg(long)]
    pub max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    /// Pump parameter held fixed on an omega grid.
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
    /// Normalized sideband held fixed on a sigma grid; defaults to nu_det/gamma.
    #[arg(long)]
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelOverrides,
    #[command(flatten)]
    pub detection: DetectionOverrides,
    #[arg(long, value_enum, default_value_t = MeasurementArg::Twin)]
    pub measurement: MeasurementArg,
    /// Run the full photocurrent simulation instead of the expected trace.
    #[arg(long)]
    pub monte_carlo: bool,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long = "span-MHz")]
    pub span_mhz: Option<f64>,
    #[arg(long = "sweep-time-ms")]
    pub sweep_time_ms: Option<f64>,
    #[arg(long = "sample-rate-MHz")]
    pub sample_rate_mhz: Option<f64>,
    /// Replace the preset channels; `center_MHz:sigma:width_MHz`, repeatable.
    #[arg(long = "channel", value_parser = parse_channel)]
    pub channels: Vec<PdcChannel>,
    /// Sweep with no oscillating channel.
    #[arg(long, conflicts_with = "channels")]
    pub no_channels: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelOverrides,
    #[command(flatten)]
    pub detection: DetectionOverrides,
    #[arg(long, value_enum, default_value_t = MeasurementArg::Twin)]
    pub measurement: MeasurementArg,
    #[arg(long = "pump-uW", conflicts_with = "sigma")]
    pub pump_uw: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Record length in ms.
    #[arg(
        long = "duration-ms",
        visible_alias = "duration",
        default_value_t = 10.0
    )]
    pub duration_ms: f64,
    /// Sample rate in MHz.
    #[arg(
        long = "sample-rate-MHz",
        visible_alias = "sample-rate",
        default_value_t = 16.0
    )]
    pub sample_rate_mhz: f64,
    /// Power transmission of an attenuator in front of both detectors.
    #[arg(long, default_value_t = 1.0)]
    pub transmission: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelOverrides,
    /// CSV with header `power_uW,variance_snu[,weight]`.
    #[arg(long)]
    pub data: PathBuf,
    /// Normalized sideband; defaults to nu_det/gamma.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Fitted-curve CSV; defaults to `<out>.curve.csv` when `--out` is set.
    #[arg(long)]
    pub curve_out: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RelaxArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelOverrides,
    #[arg(long, default_value_t = 1.0)]
    pub min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub max: f64,
    #[arg(long, default_value_t = 61)]
    pub count: usize,
}

fn parse_channel(text: &str) -> std::result::Result<PdcChannel, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [center, sigma, width] = parts[..] else {
        return Err(format!("expected center_MHz:sigma:width_MHz, got `{text}`"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    Ok(PdcChannel {
        center: num(center)? * MHZ,
        sigma: num(sigma)?,
        width: num(width)? * MHZ,
    })
}

impl ModelOverrides {
    fn apply(&self, p: &mut ParameterSet) {
        let set = |target: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *target = v;
            }
        };
        set(&mut p.cavity.gamma_mhz, self.gamma_mhz);
        set(&mut p.cavity.gamma_p_mhz, self.gamma_p_mhz);
        set(&mut p.cavity.gamma_p0_mhz, self.gamma_p0_mhz);
        set(&mut p.cavity.coupling_ratio, self.coupling_ratio);
        set(&mut p.nu_det_mhz, self.nu_det_mhz);
        set(&mut p.eta_twin, self.eta_twin);
        set(&mut p.eta_single, self.eta_single);
        if let Some(t) = self.threshold_uw {
            p.threshold_uw_options = vec![t];
        }
    }
}

impl DetectionOverrides {
    fn apply(&self, p: &mut ParameterSet) {
        let d = &mut p.detection;
        if let Some(v) = self.rbw_khz {
            d.rbw_khz = v;
        }
        if let Some(v) = self.vbw_khz {
            d.vbw_khz = v;
        }
        if let Some(v) = self.avg_count {
            d.avg_count = v;
        }
        if let Some(v) = self.cmrr_imbalance {
            d.cmrr_imbalance = v;
        }
        if let Some(v) = self.electronic_floor {
            d.electronic_floor = v;
        }
    }
}

fn load_params(
    common: &CommonArgs,
    model: &ModelOverrides,
    detection: Option<&DetectionOverrides>,
) -> Result<ParameterSet> {
    let mut p = ParameterSet::resolve(&common.params)?;
    model.apply(&mut p);
    if let Some(d) = detection {
        d.apply(&mut p);
    }
    Ok(p)
}

/// Evenly spaced grid; `count == 1` yields `min`.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![min],
        _ => (0..count)
            .map(|k| {
                if k == count - 1 {
                    max
                } else {
                    min + (max - min) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// One output file produced by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    /// `None` means standard output.
    pub path: Option<PathBuf>,
    pub contents: String,
}

/// Writes all outputs or none of them.
pub fn write_outputs(outputs: &[Output]) -> Result<()> {
    let mut staged = Vec::new();
    for out in outputs {
        if let Some(path) = &out.path {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
            tmp.write_all(out.contents.as_bytes())?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, path.clone()));
        }
    }
    let mut persisted: Vec<PathBuf> = Vec::new();
    for (tmp, path) in staged {
        if let Err(e) = tmp.persist(&path) {
            for p in &persisted {
                let _ = std::fs::remove_file(p);
            }
            return Err(Error::Io(e.error));
        }
        persisted.push(path);
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for out in outputs.iter().filter(|o| o.path.is_none()) {
        lock.write_all(out.contents.as_bytes())?;
    }
    Ok(())
}

fn render(table: &Table, format: Format, extra: serde_json::Value) -> Result<String> {
    Ok(match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut doc = extra;
            doc["table"] = table.to_json_value();
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    })
}

fn marker_pair(v: Result<f64>) -> Result<[Cell; 2]> {
    match v {
        Ok(snu) => Ok([Cell::Value(snu), Cell::Value(to_db(snu)?)]),
        Err(Error::Divergence { .. }) => Ok([Cell::Marker(Marker::Pole); 2]),
        Err(e) => Err(e),
    }
}

pub fn cmd_variance(args: &VarianceArgs) -> Result<(Vec<Output>, String)> {
    let p = load_params(&args.common, &args.model, None)?;
    let cavity = p.cavity()?;
    let ratio = cavity.coupling_ratio();
    let default_omega = p.nu_det() / cavity.gamma();
    let (min, max) = match args.grid {
        GridAxis::Sigma => (args.min.unwrap_or(1.1), args.max.unwrap_or(10.0)),
        GridAxis::Omega => (args.min.unwrap_or(0.0), args.max.unwrap_or(3.0)),
    };
    if !(min.is_finite() && max.is_finite() && min <= max) {
        return Err(invalid(
            "grid",
            format!("need finite min <= max, got [{min}, {max}]"),
        ));
    }
    let axis = match args.grid {
        GridAxis::Sigma => "sigma",
        GridAxis::Omega => "omega",
    };
    let mut table = Table::new([
        axis,
        "v_minus_snu",
        "v_minus_db",
        "v_plus_snu",
        "v_plus_db",
        "v_single_snu",
        "v_single_db",
    ]);
    for x in linspace(min, max, args.count) {
        let (sigma, omega) = match args.grid {
            GridAxis::Sigma => (x, args.omega.unwrap_or(default_omega)),
            GridAxis::Omega => (args.sigma, x),
        };
        if sigma < 1.0 {
            let mut row = vec![Cell::Value(x)];
            row.extend([Cell::Marker(Marker::BelowThreshold); 6]);
            table.push(row);
            continue;
        }
        let mut row = vec![Cell::Value(x)];
        row.extend(marker_pair(
            twin_difference_variance(ratio, p.eta_twin, omega).map(|r| r.value_snu),
        )?);
        row.extend(marker_pair(
            twin_sum_variance(ratio, p.eta_twin, omega, sigma).map(|r| r.value_snu),
        )?);
        row.extend(marker_pair(
            single_beam_variance(ratio, p.eta_single, omega, sigma).map(|r| r.value_snu),
        )?);
        table.push(row);
    }
    let echo = json!({
        "command": "variance",
        "params": p,
        "grid": { "axis": axis, "min": min, "max": max, "count": args.count },
        "fixed": match args.grid {
            GridAxis::Sigma => json!({ "omega": args.omega.unwrap_or(default_omega) }),
            GridAxis::Omega => json!({ "sigma": args.sigma }),
        },
    });
    let summary = format!("{} rows\n", table.rows.len());
    Ok((
        vec![Output {
            path: args.common.out.clone(),
            contents: render(&table, args.common.format, echo)?,
        }],
        summary,
    ))
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(Vec<Output>, String)> {
    let mut p = load_params(&args.common, &args.model, Some(&args.detection))?;
    let s = &mut p.sweep;
    if let Some(v) = args.points {
        s.points = v;
    }
    if let Some(v) = args.span_mhz {
        s.span_mhz = v;
    }
    if let Some(v) = args.sweep_time_ms {
        s.sweep_time_ms = v;
    }
    if let Some(v) = args.sample_rate_mhz {
        s.sample_rate_mhz = v;
    }
    let measurement = Measurement::from(args.measurement);
    let mode = if args.monte_carlo {
        SweepMode::MonteCarlo
    } else {
        SweepMode::Expected
    };
    let cavity = p.cavity()?;
    let chain = p.detection_chain(measurement)?;
    let mut config = p.sweep_config(measurement, mode, args.common.seed)?;
    if args.no_channels {
        config.channels.clear();
    } else if !args.channels.is_empty() {
        config.channels = args.channels.clone();
    }
    let trace = detuning_sweep(&cavity, &chain, &config)?;

    let contents = match args.common.format {
        Format::Csv => sweep_to_csv(&trace),
        Format::Json => {
            SweepDocument {
                cavity,
                chain,
                config,
                trace: trace.clone(),
            }
            .to_json()?
                + "\n"
        }
    };
    let column = match measurement {
        Measurement::TwinBeam => &trace.noise_diff,
        Measurement::SingleBeam => &trace.noise_single,
    };
    let (k_min, v_min) =
        column.iter().enumerate().fold(
            (0, f64::INFINITY),
            |best, (k, &v)| if v < best.1 { (k, v) } else { best },
        );
    let summary = if trace.is_empty() {
        String::new()
    } else {
        format!(
            "minimum {}: {} SNU ({} dB) at {} MHz\n",
            match measurement {
                Measurement::TwinBeam => "noise_diff",
                Measurement::SingleBeam => "noise_single",
            },
            format_sig9(v_min),
            format_sig9(to_db(v_min)?),
            format_sig9(trace.detuning[k_min] / MHZ),
        )
    };
    Ok((
        vec![Output {
            path: args.common.out.clone(),
            contents,
        }],
        summary,
    ))
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(Vec<Output>, String)> {
    let p = load_params(&args.common, &args.model, Some(&args.detection))?;
    let measurement = Measurement::from(args.measurement);
    let cavity = p.cavity()?;
    let chain = p.detection_chain(measurement)?;
    let threshold = *p
        .thresholds()
        .first()
        .ok_or_else(|| invalid("threshold_uW_options", "no threshold power given"))?;
    let op = match (args.pump_uw, args.sigma) {
        (Some(pump), _) => OperatingPoint::new(&cavity, pump * UW, threshold, p.nu_det())?,
        (None, sigma) => {
            OperatingPoint::from_sigma(&cavity, sigma.unwrap_or(3.0), threshold, p.nu_det())?
        }
    };
    let sample_rate = args.sample_rate_mhz * MHZ;
    let pair = simulate_attenuated_photocurrents(
        &cavity,
        &op,
        &chain,
        args.duration_ms * MS,
        sample_rate,
        args.common.seed,
        args.transmission,
    )?;

    let analyzer = ZeroSpanAnalyzer::new(&chain, sample_rate)?;
    let cal = analyzer.snl_calibration();
    let mut summary = format!(
        "{} samples, sigma = {}\n",
        pair.len(),
        format_sig9(op.sigma())
    );
    for (name, trace, snl) in [
        (
            "difference",
            balanced_combine(
                &pair.signal_trace,
                &pair.idler_trace,
                CombineMode::Difference,
                &chain,
            ),
            cal.power_per_dc * chain.combined_dc_weight(CombineMode::Difference),
        ),
        (
            "sum",
            balanced_combine(
                &pair.signal_trace,
                &pair.idler_trace,
                CombineMode::Sum,
                &chain,
            ),
            cal.power_per_dc * chain.combined_dc_weight(CombineMode::Sum),
        ),
        ("single", pair.signal_trace.clone(), cal.power_per_dc),
    ] {
        let analysis = analyzer.analyze(&trace, snl)?;
        summary.push_str(&format!(
            "{name}: {} +/- {} SNU\n",
            format_sig9(analysis.mean_snu),
            format_sig9(analysis.std_error)
        ));
    }

    let contents = match args.common.format {
        Format::Csv => crate::sim::io::photocurrents_to_csv(&pair),
        Format::Json => {
            PhotocurrentDocument {
                cavity,
                operating_point: op,
                chain,
                pair,
            }
            .to_json()?
                + "\n"
        }
    };
    Ok((
        vec![Output {
            path: args.common.out.clone(),
            contents,
        }],
        summary,
    ))
}

/// Reads `power_uW,variance_snu[,weight]`; a missing weight column means 1.
pub fn read_fit_data(path: &Path) -> Result<Vec<DataPoint>> {
    let text = std::fs::read_to_string(path)?;
    let rows = read_numeric_csv(&text, path, &["power_uW", "variance_snu"], &["weight"])?;
    Ok(rows
        .into_iter()
        .map(|r| DataPoint {
            power: r[0].unwrap_or(f64::NAN) * UW,
            variance: r[1].unwrap_or(f64::NAN),
            weight: r[2].unwrap_or(1.0),
        })
        .collect())
}

fn fit_summary_table(fit: &FitResult) -> Table {
    let opt = |v: Option<f64>| Cell::Value(v.unwrap_or(f64::NAN));
    let mut t = Table::new([
        "p_th_uW",
        "p_th_sd_uW",
        "asymptote_snu",
        "asymptote_sd_snu",
        "scale",
        "scale_sd",
        "residual_rms_snu",
        "iterations",
    ]);
    t.push(vec![
        Cell::Value(fit.p_th_hat / UW),
        opt(fit.p_th_sd.map(|v| v / UW)),
        Cell::Value(fit.asymptote_hat),
        opt(fit.asymptote_sd),
        Cell::Value(fit.scale_hat),
        opt(fit.scale_sd),
        Cell::Value(fit.residual_rms),
        Cell::Value(fit.iterations as f64),
    ]);
    t
}

fn curve_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".curve.csv");
    out.with_file_name(name)
}

pub fn cmd_fit(args: &FitArgs) -> Result<(Vec<Output>, String)> {
    let p = load_params(&args.common, &args.model, None)?;
    let cavity = p.cavity()?;
    let omega = args.omega.unwrap_or(p.nu_det() / cavity.gamma());
    let data = read_fit_data(&args.data)?;
    let config = FitConfig {
        max_iterations: args.max_iterations,
        tolerance: args.tolerance,
        ..FitConfig::default()
    };
    let fit = fit_single_beam_noise(&data, omega, &config)?;

    let p_max = data.iter().map(|d| d.power).fold(0.0, f64::max);
    let curve = fit.curve(p_max, 200);
    let mut curve_table = Table::new(["power_uW", "variance_snu"]);
    for &(power, v) in &curve {
        curve_table.push(vec![Cell::Value(power / UW), Cell::Value(v)]);
    }

    let main = match args.common.format {
        Format::Csv => fit_summary_table(&fit).to_csv(),
        Format::Json => {
            let doc = json!({
                "command": "fit",
                "input": {
                    "data_file": args.data,
                    "omega": omega,
                    "config": { "max_iterations": config.max_iterations, "tolerance": config.tolerance,
                                "penalty_weight": config.penalty_weight },
                    "points": data.iter().map(|d| json!({
                        "power_uW": d.power / UW, "variance_snu": d.variance, "weight": d.weight,
                    })).collect::<Vec<_>>(),
                },
                "result": {
                    "p_th_uW": fit.p_th_hat / UW,
                    "p_th_sd_uW": fit.p_th_sd.map(|v| v / UW),
                    "asymptote_snu": fit.asymptote_hat,
                    "asymptote_sd_snu": fit.asymptote_sd,
                    "scale": fit.scale_hat,
                    "scale_sd": fit.scale_sd,
                    "residual_rms_snu": fit.residual_rms,
                    "omega": fit.omega,
                    "converged": fit.converged,
                    "iterations": fit.iterations,
                    "objective_history": fit.objective_history,
                },
                "curve": {
                    "power_uW": curve.iter().map(|c| rounded_json(c.0 / UW)).collect::<Vec<_>>(),
                    "variance_snu": curve.iter().map(|c| rounded_json(c.1)).collect::<Vec<_>>(),
                },
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    let mut outputs = vec![Output {
        path: args.common.out.clone(),
        contents: main,
    }];
    let curve_target = args
        .curve_out
        .clone()
        .or_else(|| args.common.out.as_deref().map(curve_path));
    if let Some(path) = curve_target {
        outputs.push(Output {
            path: Some(path),
            contents: curve_table.to_csv(),
        });
    }
    let summary = format!(
        "P_th = {} uW, asymptote = {} SNU, residual rms = {} SNU, {} iterations\n",
        format_sig9(fit.p_th_hat / UW),
        format_sig9(fit.asymptote_hat),
        format_sig9(fit.residual_rms),
        fit.iterations
    );
    Ok((outputs, summary))
}

pub fn cmd_relax(args: &RelaxArgs) -> Result<(Vec<Output>, String)> {
    let p = load_params(&args.common, &args.model, None)?;
    let cavity = p.cavity()?;
    if !(args.min.is_finite() && args.max.is_finite() && args.min <= args.max) {
        return Err(invalid(
            "grid",
            format!("need finite min <= max, got [{}, {}]", args.min, args.max),
        ));
    }
    let mut table = Table::new(["sigma", "nu_n"]);
    for sigma in linspace(args.min, args.max, args.count) {
        let info = relaxation_frequency(sigma, cavity.gamma_p(), cavity.gamma())?;
        table.push(vec![
            Cell::Value(sigma),
            info.nu_n
                .map(Cell::Value)
                .unwrap_or(Cell::Marker(Marker::BelowThreshold)),
        ]);
    }
    let info = relaxation_frequency(0.0, cavity.gamma_p(), cavity.gamma())?;
    let (lo, hi) = info.in_band_window;
    let echo = json!({
        "command": "relax",
        "params": p,
        "sigma_threshold": rounded_json(info.sigma_threshold),
        "in_band_window": [rounded_json(lo), rounded_json(hi)],
    });
    let summary = format!(
        "relaxation threshold sigma = {}; in-band window [{}, {}]\n",
        format_sig9(info.sigma_threshold),
        format_sig9(lo),
        format_sig9(hi)
    );
    Ok((
        vec![Output {
            path: args.common.out.clone(),
            contents: render(&table, args.common.format, echo)?,
        }],
        summary,
    ))
}

/// Runs one command, writing its outputs. The summary goes to standard error.
pub fn run(cli: &Cli) -> Result<()> {
    let (outputs, summary) = match &cli.command {
        Command::Variance(a) => cmd_variance(a)?,
        Command::Sweep(a) => cmd_sweep(a)?,
        Command::Simulate(a) => cmd_simulate(a)?,
        Command::Fit(a) => cmd_fit(a)?,
        Command::Relax(a) => cmd_relax(a)?,
    };
    write_outputs(&outputs)?;
    eprint!("{summary}");
    Ok(())
}

/// Process entry point: parses arguments, runs, maps errors to exit code 1.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::NonConvergence { iterations, best }) => {
            eprintln!(
                "error: fit did not converge after {iterations} iterations; best iterate P_th = {} uW, \
                 asymptote = {} SNU, objective = {}",
                format_sig9(best.p_th_hat / UW),
                format_sig9(best.asymptote_hat),
                best.objective_history.last().map(|v| format_sig9(*v)).unwrap_or_default()
            );
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
