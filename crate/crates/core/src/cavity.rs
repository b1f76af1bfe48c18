//! Resonator and operating-point parameters.
//!
//! All rates are full linewidths in Hz and all powers are in W. The pump and
//! the parametric (signal/idler) modes share one [`CavityParams`] record;
//! signal and idler are assumed to have identical linewidth and coupling.

use serde::{Deserialize, Serialize};

use crate::error::{check_nonnegative, check_positive, invalid, Result};

/// Relative tolerance for `gamma == alpha + gamma0`.
pub const LOSS_BUDGET_TOLERANCE: f64 = 1e-12;

/// Relative tolerance around `gamma0 / gamma = 0.5` for the critical label.
pub const CRITICAL_COUPLING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    gamma_p: f64,
    gamma_p0: f64,
    gamma: f64,
    gamma0: f64,
    alpha: f64,
}

impl CavityParams {
    /// Builds a resonator description, rejecting any loss budget where the
    /// parametric linewidth is not the sum of intrinsic loss and coupling.
    pub fn new(gamma_p: f64, gamma_p0: f64, gamma: f64, gamma0: f64, alpha: f64) -> Result<Self> {
        check_positive("gamma_p", gamma_p)?;
        check_positive("gamma_p0", gamma_p0)?;
        check_positive("gamma", gamma)?;
        check_positive("gamma0", gamma0)?;
        check_positive("alpha", alpha)?;
        if gamma_p0 > gamma_p {
            return Err(invalid(
                "gamma_p0",
                format!("{gamma_p0} exceeds gamma_p = {gamma_p}"),
            ));
        }
        if gamma0 > gamma {
            return Err(invalid(
                "gamma0",
                format!("{gamma0} exceeds gamma = {gamma}"),
            ));
        }
        let mismatch = (alpha + gamma0 - gamma).abs() / gamma;
        if mismatch > LOSS_BUDGET_TOLERANCE {
            return Err(invalid(
                "gamma",
                format!(
                    "{gamma} != alpha + gamma0 = {} (relative deviation {mismatch:e})",
                    alpha + gamma0
                ),
            ));
        }
        Ok(Self {
            gamma_p,
            gamma_p0,
            gamma,
            gamma0,
            alpha,
        })
    }

    /// Builds the parameters from the parametric coupling ratio `gamma0 / gamma`.
    /// The intrinsic loss is whatever remains of the linewidth.
    pub fn from_coupling_ratio(
        gamma_p: f64,
        gamma_p0: f64,
        gamma: f64,
        ratio: f64,
    ) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(invalid("coupling_ratio", format!("{ratio} outside (0, 1)")));
        }
        let gamma0 = ratio * gamma;
        Self::new(gamma_p, gamma_p0, gamma, gamma0, gamma - gamma0)
    }

    pub fn gamma_p(&self) -> f64 {
        self.gamma_p
    }

    pub fn gamma_p0(&self) -> f64 {
        self.gamma_p0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `gamma0 / gamma`, the fraction of parametric loss that leaves through the coupler.
    pub fn coupling_ratio(&self) -> f64 {
        self.gamma0 / self.gamma
    }

    pub fn pump_coupling_ratio(&self) -> f64 {
        self.gamma_p0 / self.gamma_p
    }

    pub fn coupling_regime(&self) -> CouplingRegime {
        // construction already guarantees 0 < gamma0 <= gamma
        coupling_regime(self.gamma0, self.gamma).expect("validated at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pump_power: f64,
    threshold_power: f64,
    sigma: f64,
    nu_det: f64,
    omega: f64,
}

impl OperatingPoint {
    pub fn new(
        cavity: &CavityParams,
        pump_power: f64,
        threshold_power: f64,
        nu_det: f64,
    ) -> Result<Self> {
        let sigma = pump_parameter(pump_power, threshold_power)?;
        let omega = normalized_sideband(nu_det, cavity)?;
        Ok(Self {
            pump_power,
            threshold_power,
            sigma,
            nu_det,
            omega,
        })
    }

    /// An operating point given directly by its pump parameter, with the
    /// pump power reconstructed as `sigma^2 * threshold_power`.
    pub fn from_sigma(
        cavity: &CavityParams,
        sigma: f64,
        threshold_power: f64,
        nu_det: f64,
    ) -> Result<Self> {
        check_nonnegative("sigma", sigma)?;
        Self::new(
            cavity,
            sigma * sigma * threshold_power,
            threshold_power,
            nu_det,
        )
    }

    pub fn pump_power(&self) -> f64 {
        self.pump_power
    }

    pub fn threshold_power(&self) -> f64 {
        self.threshold_power
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn nu_det(&self) -> f64 {
        self.nu_det
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// Sideband frequency in units of the parametric linewidth.
pub fn normalized_sideband(nu_det: f64, cavity: &CavityParams) -> Result<f64> {
    check_nonnegative("nu_det", nu_det)?;
    Ok(nu_det / cavity.gamma)
}

/// `sqrt(P / P_th)`.
pub fn pump_parameter(pump_power: f64, threshold_power: f64) -> Result<f64> {
    check_nonnegative("pump_power", pump_power)?;
    check_positive("threshold_power", threshold_power)?;
    Ok((pump_power / threshold_power).sqrt())
}

/// Threshold power of the triply resonant OPO, `k * gamma_p * gamma^2`.
pub fn threshold_power(k_const: f64, gamma_p: f64, gamma: f64) -> Result<f64> {
    check_positive("k_const", k_const)?;
    check_positive("gamma_p", gamma_p)?;
    check_positive("gamma", gamma)?;
    Ok(k_const * gamma_p * gamma * gamma)
}

/// Inverse of [`threshold_power`]: the constant that maps the given
/// linewidths onto a measured threshold.
pub fn calibrate_threshold_constant(p_th_measured: f64, gamma_p: f64, gamma: f64) -> Result<f64> {
    check_positive("p_th_measured", p_th_measured)?;
    check_positive("gamma_p", gamma_p)?;
    check_positive("gamma", gamma)?;
    Ok(p_th_measured / (gamma_p * gamma * gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingRegime {
    Undercoupled,
    Critical,
    Overcoupled,
}

pub fn coupling_regime(gamma0: f64, gamma: f64) -> Result<CouplingRegime> {
    check_positive("gamma0", gamma0)?;
    check_positive("gamma", gamma)?;
    if gamma0 > gamma {
        return Err(invalid(
            "gamma0",
            format!("{gamma0} exceeds gamma = {gamma}"),
        ));
    }
    let ratio = gamma0 / gamma;
    Ok(
        if (ratio - 0.5).abs() <= CRITICAL_COUPLING_TOLERANCE * 0.5 {
            CouplingRegime::Critical
        } else if ratio < 0.5 {
            CouplingRegime::Undercoupled
        } else {
            CouplingRegime::Overcoupled
        },
    )
}
