//! Estimation of OPO parameters from measured noise data.
//!
//! [`fit_single_beam_noise`] fits the single-beam variance model versus pump
//! power with the threshold power and an effective prefactor
//! `eta * gamma0 / gamma` free. Only that product enters the model, so the
//! efficiency and coupling ratio are not separated.

mod optimizer;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use optimizer::{
    minimize, nelder_mead, LeastSquaresProblem, OptimizerConfig, OptimizerOutcome,
};

use crate::error::{check_nonnegative, check_positive, invalid, Error, Result};
use crate::variance::{single_beam_formula, to_db};

/// One measured point: pump power (W), variance (SNU) and a relative weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub power: f64,
    pub variance: f64,
    pub weight: f64,
}

impl DataPoint {
    pub fn new(power: f64, variance: f64) -> Self {
        Self {
            power,
            variance,
            weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Weight of the quadratic penalty on thresholds above the lowest power,
    /// relative to the total data weight.
    pub penalty_weight: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-10,
            penalty_weight: 1e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Threshold power (W).
    pub p_th_hat: f64,
    /// Far-above-threshold variance implied by the fitted prefactor (SNU).
    pub asymptote_hat: f64,
    /// Effective prefactor `eta * gamma0 / gamma`.
    pub scale_hat: f64,
    /// Weighted RMS of the variance residuals (SNU).
    pub residual_rms: f64,
    /// One-sigma uncertainties; `None` when the curvature is singular.
    pub p_th_sd: Option<f64>,
    pub asymptote_sd: Option<f64>,
    pub scale_sd: Option<f64>,
    pub omega: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Objective after each accepted optimizer step.
    pub objective_history: Vec<f64>,
}

impl FitResult {
    /// Model variance at pump power `power` (W).
    pub fn model(&self, power: f64) -> f64 {
        single_beam_formula(self.scale_hat, self.omega, (power / self.p_th_hat).sqrt())
    }

    /// `points` samples of the fitted curve, geometrically spaced from just
    /// above threshold to `p_max`.
    pub fn curve(&self, p_max: f64, points: usize) -> Vec<(f64, f64)> {
        let lo = self.p_th_hat * 1.001;
        let hi = p_max.max(lo * 1.01);
        geometric_powers(lo, hi, points)
            .into_iter()
            .map(|p| (p, self.model(p)))
            .collect()
    }
}

/// Residuals of the single-beam model in the scaled parameters
/// `(P_th / P_ref, prefactor)`.
struct SingleBeamProblem {
    /// `P / P_ref` for each point.
    q: Vec<f64>,
    variance: Vec<f64>,
    sqrt_weight: Vec<f64>,
    omega: f64,
    sqrt_penalty: f64,
}

impl SingleBeamProblem {
    fn terms(&self, x: f64, q: f64) -> (f64, f64) {
        let sigma = (q / x).sqrt();
        let o2 = self.omega * self.omega;
        let d = o2 + (sigma - 1.0) * (sigma - 1.0);
        (sigma, d)
    }
}

impl LeastSquaresProblem for SingleBeamProblem {
    fn residuals(&self, p: &[f64]) -> Option<Vec<f64>> {
        let (x, a) = (p[0], p[1]);
        if !(x > 0.0) || !a.is_finite() {
            return None;
        }
        let mut r: Vec<f64> = self
            .q
            .iter()
            .zip(&self.variance)
            .zip(&self.sqrt_weight)
            .map(|((&q, &v), &sw)| sw * (v - single_beam_formula(a, self.omega, (q / x).sqrt())))
            .collect();
        // keep the threshold below the lowest power and the prefactor nonnegative
        r.push(self.sqrt_penalty * (x - 1.0).max(0.0));
        r.push(self.sqrt_penalty * (-a).max(0.0));
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self, p: &[f64]) -> Option<Vec<Vec<f64>>> {
        let (x, a) = (p[0], p[1]);
        if !(x > 0.0) {
            return None;
        }
        let norm = 1.0 + self.omega * self.omega;
        let mut jac: Vec<Vec<f64>> = self
            .q
            .iter()
            .zip(&self.sqrt_weight)
            .map(|(&q, &sw)| {
                let (sigma, d) = self.terms(x, q);
                let dm_da = -0.5 * sigma * (sigma - 2.0) / (norm * d);
                let dm_dx = a * sigma * (sigma - 1.0) / (2.0 * x * d * d);
                vec![-sw * dm_dx, -sw * dm_da]
            })
            .collect();
        jac.push(vec![if x > 1.0 { self.sqrt_penalty } else { 0.0 }, 0.0]);
        jac.push(vec![0.0, if a < 0.0 { -self.sqrt_penalty } else { 0.0 }]);
        jac.iter().flatten().all(|v| v.is_finite()).then_some(jac)
    }
}

fn validate_data(data: &[DataPoint]) -> Result<()> {
    if data.len() < 4 {
        return Err(invalid(
            "data",
            format!("need at least 4 points, got {}", data.len()),
        ));
    }
    for d in data {
        check_positive("power", d.power)?;
        check_positive("variance", d.variance)?;
        check_positive("weight", d.weight)?;
    }
    let (lo, hi) = data.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
        (lo.min(d.power), hi.max(d.power))
    });
    if hi < 4.0 * lo {
        return Err(invalid(
            "data",
            format!("powers span only a factor {:.3}, need 4", hi / lo),
        ));
    }
    Ok(())
}

/// Fits the single-beam variance model to `(P, V, weight)` data at the
/// normalized sideband `omega`.
pub fn fit_single_beam_noise(
    data: &[DataPoint],
    omega: f64,
    config: &FitConfig,
) -> Result<FitResult> {
    validate_data(data)?;
    check_nonnegative("omega", omega)?;

    // canonical order and weight scale make the fit independent of both
    let mut points = data.to_vec();
    points.sort_by(|a, b| {
        a.power
            .total_cmp(&b.power)
            .then(a.variance.total_cmp(&b.variance))
            .then(a.weight.total_cmp(&b.weight))
    });
    let w_max = points.iter().map(|d| d.weight).fold(0.0, f64::max);
    let p_ref = points[0].power;
    let weights: Vec<f64> = points.iter().map(|d| d.weight / w_max).collect();
    let total_weight: f64 = weights.iter().sum();
    let problem = SingleBeamProblem {
        q: points.iter().map(|d| d.power / p_ref).collect(),
        variance: points.iter().map(|d| d.variance).collect(),
        sqrt_weight: weights.iter().map(|w| w.sqrt()).collect(),
        omega,
        sqrt_penalty: (config.penalty_weight * total_weight).sqrt(),
    };

    let norm = 1.0 + omega * omega;
    let v_min = points
        .iter()
        .map(|d| d.variance)
        .fold(f64::INFINITY, f64::min);
    let scale0 = (2.0 * norm * (1.0 - v_min)).max(1e-3);
    let start = [0.9, scale0];
    let outcome = minimize(
        &problem,
        &start,
        &OptimizerConfig {
            max_iterations: config.max_iterations,
            tolerance: config.tolerance,
        },
    );

    let (x, scale) = (outcome.x[0], outcome.x[1]);
    let residuals = problem.residuals(&outcome.x).unwrap_or_default();
    let data_ss: f64 = residuals[..points.len()].iter().map(|r| r * r).sum();
    let residual_rms = (data_ss / total_weight).sqrt();

    let (x_sd, scale_sd) = match parameter_covariance(&problem, &outcome.x, data_ss, points.len()) {
        Some(cov) => (
            Some(cov[0][0].max(0.0).sqrt()),
            Some(cov[1][1].max(0.0).sqrt()),
        ),
        None => (None, None),
    };
    let result = FitResult {
        p_th_hat: x * p_ref,
        asymptote_hat: 1.0 - scale / (2.0 * norm),
        scale_hat: scale,
        residual_rms,
        p_th_sd: x_sd.map(|s| s * p_ref),
        asymptote_sd: scale_sd.map(|s| s / (2.0 * norm)),
        scale_sd,
        omega,
        converged: outcome.converged,
        iterations: outcome.iterations,
        objective_history: outcome.history,
    };
    if !result.converged {
        return Err(Error::NonConvergence {
            iterations: result.iterations,
            best: Box::new(result),
        });
    }
    Ok(result)
}

/// `2 s^2 H^-1` with `H` the central-difference Hessian of the objective and
/// `s^2` the residual variance per degree of freedom.
fn parameter_covariance<P: LeastSquaresProblem>(
    problem: &P,
    at: &[f64],
    data_ss: f64,
    n_points: usize,
) -> Option<Vec<Vec<f64>>> {
    let dof = n_points.checked_sub(at.len()).filter(|&d| d > 0)?;
    let hessian = numerical_hessian(|p| problem.objective(p), at);
    let inverse = optimizer::invert(&hessian)?;
    let s2 = data_ss / dof as f64;
    Some(
        inverse
            .iter()
            .map(|row| row.iter().map(|v| 2.0 * s2 * v).collect())
            .collect(),
    )
}

pub(crate) fn numerical_hessian<F: Fn(&[f64]) -> f64>(f: F, at: &[f64]) -> Vec<Vec<f64>> {
    let n = at.len();
    let h: Vec<f64> = at.iter().map(|v| 1e-4 * v.abs().max(1e-6)).collect();
    let eval = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut p = at.to_vec();
        p[di] += si * h[di];
        p[dj] += sj * h[dj];
        f(&p)
    };
    let f0 = f(at);
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut p = at.to_vec();
        p[i] += h[i];
        let up = f(&p);
        p[i] = at[i] - h[i];
        let down = f(&p);
        hess[i][i] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
        for j in 0..i {
            let v = (eval(i, 1.0, j, 1.0) - eval(i, 1.0, j, -1.0) - eval(i, -1.0, j, 1.0)
                + eval(i, -1.0, j, -1.0))
                / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// Mean twin-beam squeezing of one coupling regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingSummary {
    pub mean_db: f64,
    pub std_error_db: f64,
    pub count: usize,
}

/// Unweighted mean and standard error, in dB, of `(P, V_diff)` data.
pub fn mean_squeezing(data: &[(f64, f64)]) -> Result<SqueezingSummary> {
    if data.len() < 2 {
        return Err(invalid(
            "data",
            format!("need at least 2 points, got {}", data.len()),
        ));
    }
    let db: Vec<f64> = data.iter().map(|&(_, v)| to_db(v)).collect::<Result<_>>()?;
    let n = db.len() as f64;
    let mean = db.iter().sum::<f64>() / n;
    let var = db.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(SqueezingSummary {
        mean_db: mean,
        std_error_db: (var / n).sqrt(),
        count: db.len(),
    })
}

/// `n` powers spaced geometrically on `[lo, hi]`.
pub fn geometric_powers(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).ln() / (n - 1) as f64;
            (0..n)
                .map(|k| {
                    if k == n - 1 {
                        hi
                    } else {
                        lo * (ratio * k as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Single-beam variance data drawn from the model with additive Gaussian noise.
pub fn synthetic_single_beam_data(
    p_th: f64,
    prefactor: f64,
    omega: f64,
    noise_sd: f64,
    powers: &[f64],
    seed: u64,
) -> Result<Vec<DataPoint>> {
    check_positive("p_th", p_th)?;
    check_nonnegative("noise_sd", noise_sd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd).map_err(|e| invalid("noise_sd", e.to_string()))?;
    powers
        .iter()
        .map(|&p| {
            let sigma = (p / p_th).sqrt();
            if sigma < 1.0 {
                return Err(invalid(
                    "powers",
                    format!("{p} W is below threshold {p_th} W"),
                ));
            }
            let v = single_beam_formula(prefactor, omega, sigma) + noise.sample(&mut rng);
            Ok(DataPoint::new(p, v))
        })
        .collect()
}
