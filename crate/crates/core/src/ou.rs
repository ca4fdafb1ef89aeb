//! Ornstein-Uhlenbeck (Vasicek) representation of the call rate:
//!
//! ```text
//! dY = -theta_bar (Y - mu_bar) dt + sigma_bar dW,   t in months
//! ```
//!
//! calibrated to an AR(1) fit by matching the conditional mean and the
//! stationary standard deviation at monthly sampling points.

use alloc::vec::Vec;

use crate::autoregress::Ar1Fit;
use crate::error::{check_open, Error, Result};
use crate::rng::NormalStream;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OuParams {
    pub mu_bar: f64,
    /// Per month.
    pub theta_bar: f64,
    /// Per square-root month, in the units of `mu_bar`.
    pub sigma_bar: f64,
}

impl OuParams {
    /// `sigma_bar = 0` is accepted and gives the noiseless decay.
    pub fn new(mu_bar: f64, theta_bar: f64, sigma_bar: f64) -> Result<Self> {
        check_open("mu_bar", mu_bar, f64::NEG_INFINITY, f64::INFINITY, "finite")?;
        check_open("theta_bar", theta_bar, 0.0, f64::INFINITY, "positive")?;
        if !(sigma_bar >= 0.0 && sigma_bar.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma_bar",
                value: sigma_bar,
                constraint: "finite and non-negative",
            });
        }
        Ok(Self {
            mu_bar,
            theta_bar,
            sigma_bar,
        })
    }

    /// `sigma_bar / sqrt(2 theta_bar)`.
    pub fn stationary_std(&self) -> f64 {
        self.sigma_bar / libm::sqrt(2.0 * self.theta_bar)
    }

    /// Rescales the level and diffusion, e.g. `0.01` for percent to unit interval.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mu_bar: self.mu_bar * factor,
            theta_bar: self.theta_bar,
            sigma_bar: self.sigma_bar * factor,
        }
    }

    /// Conditional mean and standard deviation `t` months ahead.
    pub fn forecast(&self, y0: f64, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "t",
                value: t,
                constraint: "non-negative",
            });
        }
        let decay = libm::exp(-self.theta_bar * t);
        let point = self.mu_bar + decay * (y0 - self.mu_bar);
        let rmse = self.stationary_std() * libm::sqrt(-libm::expm1(-2.0 * self.theta_bar * t));
        Ok((point, rmse))
    }
}

/// `mu_bar = mu`, `theta_bar = -ln rho`, `sigma_bar = sigma sqrt(-2 ln rho / (1 - rho^2))`.
///
/// The calibrated process reproduces the AR(1) forecast and its error band
/// exactly at whole months. Requires `0 < rho < 1`.
pub fn calibrate_from_ar1(fit: &Ar1Fit) -> Result<OuParams> {
    if !(fit.rho > 0.0) {
        return Err(Error::NonPositiveAutocorrelation(fit.rho));
    }
    let theta_bar = -libm::log(fit.rho);
    let sigma_bar = fit.sigma * libm::sqrt(2.0 * theta_bar / (1.0 - fit.rho * fit.rho));
    OuParams::new(fit.mu(), theta_bar, sigma_bar)
}

pub fn ou_forecast(params: &OuParams, y0: f64, t: f64) -> Result<(f64, f64)> {
    params.forecast(y0, t)
}

/// A path on a uniform time grid starting at 0.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SimPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
}

/// Exact one-step transition of a mean-reverting Gaussian process with a
/// signed diffusion coefficient.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExactTransition {
    mean: f64,
    decay: f64,
    shock_scale: f64,
}

impl ExactTransition {
    pub fn new(mean: f64, theta: f64, diffusion: f64, step: f64) -> Self {
        let decay = libm::exp(-theta * step);
        let var_factor = -libm::expm1(-2.0 * theta * step) / (2.0 * theta);
        Self {
            mean,
            decay,
            shock_scale: diffusion * libm::sqrt(var_factor),
        }
    }

    pub fn step(&self, x: f64, z: f64) -> f64 {
        self.mean + self.decay * (x - self.mean) + self.shock_scale * z
    }
}

pub(crate) fn check_grid(step: f64, n_steps: usize) -> Result<()> {
    check_open("step", step, 0.0, f64::INFINITY, "positive")?;
    if n_steps == 0 {
        return Err(Error::InvalidParameter {
            name: "n_steps",
            value: 0.0,
            constraint: "at least 1",
        });
    }
    Ok(())
}

pub(crate) fn run_path(
    x0: f64,
    step: f64,
    n_steps: usize,
    seed: u64,
    mut advance: impl FnMut(f64, f64) -> f64,
) -> SimPath {
    let mut shocks = NormalStream::new(seed);
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(x0);
    let mut x = x0;
    for _ in 0..n_steps {
        x = advance(x, shocks.next_normal());
        values.push(x);
    }
    SimPath {
        times: (0..=n_steps).map(|k| k as f64 * step).collect(),
        values,
        seed,
    }
}

/// Samples the OU process with its exact Gaussian transition:
///
/// `y_{k+1} = mu + e^{-theta dt} (y_k - mu) + sigma sqrt((1 - e^{-2 theta dt}) / (2 theta)) z_k`
///
/// Shock `z_k` is the `k`-th draw of `NormalStream::new(seed)`. The scheme
/// has no discretisation bias, and paths may go negative.
pub fn simulate_ou(params: &OuParams, y0: f64, step: f64, n_steps: usize, seed: u64) -> Result<SimPath> {
    check_grid(step, n_steps)?;
    let tr = ExactTransition::new(params.mu_bar, params.theta_bar, params.sigma_bar, step);
    Ok(run_path(y0, step, n_steps, seed, |x, z| tr.step(x, z)))
}

/// Euler-Maruyama scheme on the same shocks. Biased for steps that are not
/// small relative to `1 / theta_bar`; kept for comparison.
pub fn simulate_ou_euler(params: &OuParams, y0: f64, step: f64, n_steps: usize, seed: u64) -> Result<SimPath> {
    check_grid(step, n_steps)?;
    let p = *params;
    let sd = libm::sqrt(step);
    Ok(run_path(y0, step, n_steps, seed, |x, z| {
        x - p.theta_bar * (x - p.mu_bar) * step + p.sigma_bar * sd * z
    }))
}
