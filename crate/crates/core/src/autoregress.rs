//! OLS estimation of AR(1) and AR(2) models, closed-form forecasts and
//! impulse responses.
//!
//! Conventions: `sigma` is the root-mean-squared residual with divisor equal
//! to the number of usable observations. Standard errors are the classical
//! homoskedastic ones (`SSR / (n - k)`). `R^2` is centered. Confidence
//! intervals are `estimate +- 1.96 se`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_open, Error, Result};
use crate::ols::{ols, Ols};
use crate::series::{percentile_sorted, sorted_copy, RateSeries, Units};

/// Fits need at least this many observations.
pub const MIN_OBSERVATIONS: usize = 30;

/// Distance below which two characteristic roots are treated as repeated.
pub const REPEATED_ROOT_TOL: f64 = 1e-10;

const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ResidualStats {
    pub mean_abs: f64,
    pub p5_abs: f64,
    pub median_abs: f64,
    pub p95_abs: f64,
}

impl ResidualStats {
    fn from_residuals(residuals: &[f64]) -> Self {
        let abs: Vec<f64> = residuals.iter().map(|e| libm::fabs(*e)).collect();
        let sorted = sorted_copy(&abs);
        Self {
            mean_abs: abs.iter().sum::<f64>() / abs.len() as f64,
            p5_abs: percentile_sorted(&sorted, 0.05),
            median_abs: percentile_sorted(&sorted, 0.5),
            p95_abs: percentile_sorted(&sorted, 0.95),
        }
    }
}

/// What an OLS run adds on top of the point estimates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegressionStats {
    /// In the order of the coefficients (intercept first).
    pub std_errors: Vec<f64>,
    pub r_squared: f64,
    /// Number of usable (lagged) observations in the regression.
    pub n_obs: usize,
    pub residuals: ResidualStats,
}

impl RegressionStats {
    fn new<const K: usize>(fit: &Ols<K>, y: &[f64]) -> Self {
        let ybar = y.iter().sum::<f64>() / y.len() as f64;
        let sst: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
        Self {
            std_errors: fit.std_errors().to_vec(),
            r_squared: 1.0 - fit.ssr() / sst,
            n_obs: y.len(),
            residuals: ResidualStats::from_residuals(&fit.residuals),
        }
    }

    /// 95% interval for coefficient `i`.
    pub fn conf_interval(&self, i: usize, estimate: f64) -> (f64, f64) {
        let half = Z_95 * self.std_errors[i];
        (estimate - half, estimate + half)
    }
}

fn rms(residuals: &[f64]) -> f64 {
    libm::sqrt(residuals.iter().map(|e| e * e).sum::<f64>() / residuals.len() as f64)
}

fn check_series(series: &RateSeries) -> Result<&[f64]> {
    series.require_units(Units::ContinuousPercent)?;
    if series.len() < MIN_OBSERVATIONS {
        return Err(Error::TooShort {
            required: MIN_OBSERVATIONS,
            actual: series.len(),
        });
    }
    Ok(series.values())
}

/// Common interface of the fitted autoregressions.
pub trait ArModel {
    fn long_run_mean(&self) -> f64;

    /// Innovation standard deviation.
    fn sigma(&self) -> f64;

    /// Moving-average weights `psi_0 = 1, psi_1, ..., psi_horizon`.
    fn psi_weights(&self, horizon: usize) -> Vec<f64>;
}

/// `y_{t+1} = alpha + rho y_t + sigma e_t`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Ar1Fit {
    pub alpha: f64,
    pub rho: f64,
    pub sigma: f64,
    /// Present when the fit came from data.
    pub stats: Option<RegressionStats>,
}

impl Ar1Fit {
    pub fn from_coefficients(alpha: f64, rho: f64, sigma: f64) -> Result<Self> {
        check_open("rho", rho, -1.0, 1.0, "inside (-1, 1)")?;
        check_open("alpha", alpha, f64::NEG_INFINITY, f64::INFINITY, "finite")?;
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
                constraint: "finite and non-negative",
            });
        }
        Ok(Self {
            alpha,
            rho,
            sigma,
            stats: None,
        })
    }

    /// From the mean-deviation form `y_{t+1} - mu = rho (y_t - mu) + sigma e_t`.
    pub fn from_mean_form(mu: f64, rho: f64, sigma: f64) -> Result<Self> {
        Self::from_coefficients((1.0 - rho) * mu, rho, sigma)
    }

    /// Regresses `y_{t+1}` on `(1, y_t)` over all `T - 1` consecutive pairs.
    pub fn estimate(values: &[f64]) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::TooShort {
                required: 3,
                actual: values.len(),
            });
        }
        let y = &values[1..];
        let lag = &values[..values.len() - 1];
        let ones = vec![1.0; y.len()];
        let fit = ols([&ones, lag], y)?;
        let [alpha, rho] = fit.coef;
        if !(libm::fabs(rho) < 1.0) {
            return Err(Error::NonStationary("|rho| >= 1"));
        }
        Ok(Self {
            alpha,
            rho,
            sigma: rms(&fit.residuals),
            stats: Some(RegressionStats::new(&fit, y)),
        })
    }

    /// Monthly rate of mean reversion, `1 - rho`.
    pub fn theta(&self) -> f64 {
        1.0 - self.rho
    }

    pub fn mu(&self) -> f64 {
        self.alpha / self.theta()
    }

    /// Stationary standard deviation `sigma / sqrt(1 - rho^2)`.
    pub fn s(&self) -> f64 {
        self.sigma / libm::sqrt(1.0 - self.rho * self.rho)
    }

    /// Root of the lag polynomial `1 - rho L`.
    pub fn lag_root(&self) -> f64 {
        1.0 / self.rho
    }
}

impl ArModel for Ar1Fit {
    fn long_run_mean(&self) -> f64 {
        self.mu()
    }

    fn sigma(&self) -> f64 {
        self.sigma
    }

    fn psi_weights(&self, horizon: usize) -> Vec<f64> {
        (0..=horizon).map(|t| libm::pow(self.rho, t as f64)).collect()
    }
}

pub fn fit_ar1(series: &RateSeries) -> Result<Ar1Fit> {
    Ar1Fit::estimate(check_series(series)?)
}

/// Roots of `lambda^2 - phi1 lambda - phi2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum CharacteristicRoots {
    /// `first = (phi1 + sqrt(disc)) / 2 >= second`. Equal roots land here too.
    Real { first: f64, second: f64 },
    /// The conjugate pair `re +- i im`, `im > 0`.
    Complex { re: f64, im: f64 },
}

impl CharacteristicRoots {
    pub fn of(phi1: f64, phi2: f64) -> Self {
        let disc = phi1 * phi1 + 4.0 * phi2;
        if disc >= 0.0 {
            let r = libm::sqrt(disc);
            Self::Real {
                first: (phi1 + r) / 2.0,
                second: (phi1 - r) / 2.0,
            }
        } else {
            Self::Complex {
                re: phi1 / 2.0,
                im: libm::sqrt(-disc) / 2.0,
            }
        }
    }

    /// Largest root modulus.
    pub fn max_modulus(&self) -> f64 {
        match *self {
            Self::Real { first, second } => libm::fmax(libm::fabs(first), libm::fabs(second)),
            Self::Complex { re, im } => libm::hypot(re, im),
        }
    }

    /// Roots of the lag polynomial `1 - phi1 L - phi2 L^2`, the reciprocals of
    /// the characteristic roots. `None` for a zero characteristic root.
    pub fn lag_polynomial_roots(&self) -> LagRoots {
        match *self {
            Self::Real { first, second } => LagRoots::Real {
                first: (first != 0.0).then(|| 1.0 / first),
                second: (second != 0.0).then(|| 1.0 / second),
            },
            Self::Complex { re, im } => {
                let m2 = re * re + im * im;
                LagRoots::Complex {
                    re: re / m2,
                    im: im / m2,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum LagRoots {
    Real { first: Option<f64>, second: Option<f64> },
    Complex { re: f64, im: f64 },
}

/// `y_{t+1} = c + phi1 y_t + phi2 y_{t-1} + sigma e_t`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Ar2Fit {
    pub c: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub sigma: f64,
    pub stats: Option<RegressionStats>,
}

fn check_ar2_stationary(phi1: f64, phi2: f64) -> Result<()> {
    if !(phi2 < 1.0 + phi1) || !(phi2 < 1.0 - phi1) || !(libm::fabs(phi2) < 1.0) {
        return Err(Error::NonStationary("(phi1, phi2) outside the stationarity triangle"));
    }
    Ok(())
}

impl Ar2Fit {
    pub fn from_coefficients(c: f64, phi1: f64, phi2: f64, sigma: f64) -> Result<Self> {
        check_open("c", c, f64::NEG_INFINITY, f64::INFINITY, "finite")?;
        check_ar2_stationary(phi1, phi2)?;
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
                constraint: "finite and non-negative",
            });
        }
        Ok(Self {
            c,
            phi1,
            phi2,
            sigma,
            stats: None,
        })
    }

    /// Regresses `y_{t+1}` on `(1, y_t, y_{t-1})` over the `T - 2` usable triples.
    pub fn estimate(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 4 {
            return Err(Error::TooShort { required: 4, actual: n });
        }
        let y = &values[2..];
        let lag1 = &values[1..n - 1];
        let lag2 = &values[..n - 2];
        let ones = vec![1.0; y.len()];
        let fit = ols([&ones, lag1, lag2], y)?;
        let [c, phi1, phi2] = fit.coef;
        check_ar2_stationary(phi1, phi2)?;
        Ok(Self {
            c,
            phi1,
            phi2,
            sigma: rms(&fit.residuals),
            stats: Some(RegressionStats::new(&fit, y)),
        })
    }

    pub fn mu(&self) -> f64 {
        self.c / (1.0 - self.phi1 - self.phi2)
    }

    /// Stationary variance `(1 - phi2) sigma^2 / ((1 + phi2) ((1 - phi2)^2 - phi1^2))`.
    pub fn variance(&self) -> f64 {
        let (p1, p2) = (self.phi1, self.phi2);
        (1.0 - p2) * self.sigma * self.sigma / ((1.0 + p2) * ((1.0 - p2) * (1.0 - p2) - p1 * p1))
    }

    pub fn s(&self) -> f64 {
        libm::sqrt(self.variance())
    }

    pub fn roots(&self) -> CharacteristicRoots {
        CharacteristicRoots::of(self.phi1, self.phi2)
    }

    /// Conditional mean deviation from `mu` at time `t`, given deviations
    /// `a` at time 0 and `b` at time 1, from the general solution of the
    /// homogeneous difference equation.
    fn closed_form_deviation(&self, a: f64, b: f64, t: u32) -> f64 {
        let tf = t as f64;
        match self.roots() {
            CharacteristicRoots::Real { first, second } if first - second >= REPEATED_ROOT_TOL => {
                let (l1, l2) = (first, second);
                ((l2 * a - b) * libm::pow(l1, tf) + (b - l1 * a) * libm::pow(l2, tf)) / (l2 - l1)
            }
            CharacteristicRoots::Real { first, second } => {
                // (A + B t) lambda^t, written to stay finite at lambda = 0.
                let l = 0.5 * (first + second);
                tf * libm::pow(l, tf - 1.0) * b - (tf - 1.0) * libm::pow(l, tf) * a
            }
            CharacteristicRoots::Complex { re, im } => {
                let r = libm::hypot(re, im);
                let w = libm::atan2(im, re);
                let coef_sin = (b / r - a * libm::cos(w)) / libm::sin(w);
                libm::pow(r, tf) * (a * libm::cos(w * tf) + coef_sin * libm::sin(w * tf))
            }
        }
    }
}

impl ArModel for Ar2Fit {
    fn long_run_mean(&self) -> f64 {
        self.mu()
    }

    fn sigma(&self) -> f64 {
        self.sigma
    }

    fn psi_weights(&self, horizon: usize) -> Vec<f64> {
        let mut psi = Vec::with_capacity(horizon + 1);
        psi.push(1.0);
        if horizon >= 1 {
            psi.push(self.phi1);
        }
        for t in 2..=horizon {
            psi.push(self.phi1 * psi[t - 1] + self.phi2 * psi[t - 2]);
        }
        psi
    }
}

pub fn fit_ar2(series: &RateSeries) -> Result<Ar2Fit> {
    Ar2Fit::estimate(check_series(series)?)
}

/// One step of a multi-step forecast.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Forecast {
    /// Months ahead.
    pub horizon: u32,
    pub point: f64,
    /// Root-mean-squared forecast error.
    pub rmse: f64,
}

fn check_horizon(horizon: u32) -> Result<()> {
    if horizon == 0 {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: 0.0,
            constraint: "at least 1",
        });
    }
    Ok(())
}

/// `mu + rho^t (y0 - mu)` with error `s sqrt(1 - rho^(2t))`, `t = 1..=horizon`.
pub fn forecast_ar1(fit: &Ar1Fit, y0: f64, horizon: u32) -> Result<Vec<Forecast>> {
    check_horizon(horizon)?;
    let (mu, s) = (fit.mu(), fit.s());
    Ok((1..=horizon)
        .map(|t| {
            let rt = libm::pow(fit.rho, t as f64);
            Forecast {
                horizon: t,
                point: mu + rt * (y0 - mu),
                rmse: s * libm::sqrt(1.0 - rt * rt),
            }
        })
        .collect())
}

/// Forecast from the two most recent observations, `y0` (older) and `y1`
/// (latest). Horizon `h` is the conditional mean of `y_{1+h}`.
///
/// Points come from the closed-form solution of the difference equation and
/// are cross-checked against the forward recursion; a disagreement beyond
/// `1e-9` is reported as [`Error::ForecastMismatch`]. The error band
/// accumulates the moving-average weights, `sigma sqrt(sum_{j<h} psi_j^2)`.
pub fn forecast_ar2(fit: &Ar2Fit, y0: f64, y1: f64, horizon: u32) -> Result<Vec<Forecast>> {
    check_horizon(horizon)?;
    let mu = fit.mu();
    let (a, b) = (y0 - mu, y1 - mu);
    let psi = fit.psi_weights(horizon as usize);
    let mut out = Vec::with_capacity(horizon as usize);
    let (mut prev, mut last) = (y0, y1);
    let mut acc = 0.0;
    for h in 1..=horizon {
        let closed = mu + fit.closed_form_deviation(a, b, h + 1);
        let recursive = fit.c + fit.phi1 * last + fit.phi2 * prev;
        if libm::fabs(closed - recursive) > 1e-9 * (1.0 + libm::fabs(recursive)) {
            return Err(Error::ForecastMismatch { horizon: h });
        }
        (prev, last) = (last, recursive);
        acc += psi[h as usize - 1] * psi[h as usize - 1];
        out.push(Forecast {
            horizon: h,
            point: closed,
            rmse: fit.sigma * libm::sqrt(acc),
        });
    }
    Ok(out)
}

/// Response in basis points to a one-off 100 bp shock, `t = 0..=horizon`.
pub fn impulse_response(model: &impl ArModel, horizon: u32) -> Result<Vec<(u32, f64)>> {
    check_horizon(horizon)?;
    Ok(model
        .psi_weights(horizon as usize)
        .into_iter()
        .enumerate()
        .map(|(t, psi)| (t as u32, 100.0 * psi))
        .collect())
}
