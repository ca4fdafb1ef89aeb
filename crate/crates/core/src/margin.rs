//! Margin-loan pricing against a geometric-Brownian market index, and the
//! mean-reverting laws of motion this induces for the margin rate and for a
//! Kelly investor's leverage.
//!
//! Everything here is on the unit interval (`0.05` is five percent). Rates
//! above `1.0` are rejected as a likely percent/unit mix-up. Time in the
//! derived SDEs stays in months, inherited from [`OuParams`].

use crate::error::{check_open, Error, Result};
use crate::ou::{check_grid, run_path, ExactTransition, OuParams, SimPath};

/// Stylized annual log growth of a broad equity index.
pub const STYLIZED_NU_S: f64 = 0.09;
/// Stylized annual volatility of a broad equity index.
pub const STYLIZED_SIGMA_S: f64 = 0.15;

pub(crate) fn check_unit_rate(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            constraint: "finite",
        });
    }
    if value > 1.0 {
        return Err(Error::PercentScale {
            name,
            value,
            hint: value / 100.0,
        });
    }
    Ok(value)
}

/// Index dynamics `dS/S = mu_S dt + sigma_S dW`, `nu_S = mu_S - sigma_S^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarketIndexParams {
    pub nu_s: f64,
    pub sigma_s: f64,
}

impl MarketIndexParams {
    pub fn new(nu_s: f64, sigma_s: f64) -> Result<Self> {
        check_unit_rate("nu_s", nu_s)?;
        check_open("sigma_s", sigma_s, 0.0, f64::INFINITY, "positive")?;
        Ok(Self { nu_s, sigma_s })
    }

    pub fn stylized() -> Self {
        Self {
            nu_s: STYLIZED_NU_S,
            sigma_s: STYLIZED_SIGMA_S,
        }
    }

    pub fn variance(&self) -> f64 {
        self.sigma_s * self.sigma_s
    }

    /// Arithmetic drift `nu_S + sigma_S^2 / 2`.
    pub fn mu_s(&self) -> f64 {
        self.nu_s + self.variance() / 2.0
    }

    /// `C = nu_S / 2 - sigma_S^2 / 4`, the call-rate-independent part of the
    /// monopoly margin rate.
    pub fn pricing_constant(&self) -> f64 {
        self.nu_s / 2.0 - self.variance() / 4.0
    }

    /// Margin rate at which a Kelly client stops borrowing, `mu_S - sigma_S^2`.
    pub fn choke_price(&self) -> f64 {
        self.mu_s() - self.variance()
    }
}

/// Monopoly price of margin loans: midpoint of marginal cost (the call rate)
/// and the choke price, `call / 2 + C`.
pub fn monopoly_margin_rate(call_rate: f64, market: &MarketIndexParams) -> Result<f64> {
    check_unit_rate("call_rate", call_rate)?;
    Ok(call_rate / 2.0 + market.pricing_constant())
}

/// Nash-bargained margin rate with no-loan threat point,
/// `3/4 call + 1/4 (nu_S - sigma_S^2 / 2)`.
pub fn nash_margin_rate(call_rate: f64, market: &MarketIndexParams) -> Result<f64> {
    check_unit_rate("call_rate", call_rate)?;
    Ok(0.75 * call_rate + 0.25 * (market.nu_s - market.variance() / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KellyBet {
    /// Fraction of wealth in the index.
    pub b: f64,
    /// Margin debt per dollar of equity, `b - 1`.
    pub q: f64,
}

/// Kelly fraction `(mu_S - margin_rate) / sigma_S^2`.
pub fn kelly_bet(margin_rate: f64, market: &MarketIndexParams) -> Result<KellyBet> {
    check_unit_rate("margin_rate", margin_rate)?;
    let b = (market.mu_s() - margin_rate) / market.variance();
    Ok(KellyBet { b, q: b - 1.0 })
}

/// `d(margin) = -theta (margin - long_run_mean) dt + diffusion dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MarginRateSde {
    pub theta: f64,
    pub long_run_mean: f64,
    pub diffusion: f64,
}

/// `ou` is the call-rate process in percent; it is moved to the unit
/// interval here. The margin rate keeps the call rate's mean reversion, has
/// half its diffusion and reverts to `mu_bar / 2 + C`.
pub fn derive_margin_sde(ou: &OuParams, market: &MarketIndexParams) -> MarginRateSde {
    let unit = ou.scaled(0.01);
    MarginRateSde {
        theta: unit.theta_bar,
        long_run_mean: unit.mu_bar / 2.0 + market.pricing_constant(),
        diffusion: unit.sigma_bar / 2.0,
    }
}

/// `db = -theta (b - long_run_mean) dt + diffusion dW`, where `W` drives the
/// call rate. `diffusion` is negative: leverage falls when the call rate rises.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LeverageSde {
    pub theta: f64,
    pub long_run_mean: f64,
    pub diffusion: f64,
}

impl LeverageSde {
    pub fn stationary_std(&self) -> f64 {
        libm::fabs(self.diffusion) / libm::sqrt(2.0 * self.theta)
    }

    /// `q = b - 1` has the same increments, so only the level shifts.
    pub fn q_long_run_mean(&self) -> f64 {
        self.long_run_mean - 1.0
    }
}

/// Leverage law of motion: the Kelly bet evaluated along the margin-rate
/// process. Long-run mean is the Kelly bet at `mu_bar / 2 + C`; diffusion
/// is `-sigma_bar / (2 sigma_S^2)`.
pub fn derive_leverage_sde(ou: &OuParams, market: &MarketIndexParams) -> LeverageSde {
    let margin = derive_margin_sde(ou, market);
    let v = market.variance();
    LeverageSde {
        theta: margin.theta,
        long_run_mean: (market.mu_s() - margin.long_run_mean) / v,
        diffusion: -margin.diffusion / v,
    }
}

/// Exact-transition path of the leverage ratio. Draws the same shock
/// sequence as [`simulate_ou`](crate::ou::simulate_ou) for a given seed, and
/// applies it with the SDE's (negative) diffusion sign, so a call-rate path
/// and a leverage path with one seed are the same realisation.
pub fn simulate_leverage(sde: &LeverageSde, b0: f64, step: f64, n_steps: usize, seed: u64) -> Result<SimPath> {
    check_grid(step, n_steps)?;
    check_open("theta", sde.theta, 0.0, f64::INFINITY, "positive")?;
    let tr = ExactTransition::new(sde.long_run_mean, sde.theta, sde.diffusion, step);
    Ok(run_path(b0, step, n_steps, seed, |x, z| tr.step(x, z)))
}
