//! Histogram, Gaussian kernel density, autocorrelation and partial
//! autocorrelation.
//!
//! The autocorrelations use the whole-sample mean and the population
//! variance, i.e. `rho_j = sum_{t>j} (y_t - ybar)(y_{t-j} - ybar) / (T v)`.
//! Confidence bands are `+-1.96 / sqrt(T)` for both ACF and PACF.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{check_open, Error, Result};
use crate::series::{mean, population_variance};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HistogramBin {
    /// Lower edge; the bin is `[lower, lower + width)`.
    pub lower: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Histogram {
    pub bin_width: f64,
    /// Non-empty bins in increasing order, edges at integer multiples of the width.
    pub bins: Vec<HistogramBin>,
    /// Observations above `max_value`, left out of `bins`.
    pub overflow: usize,
}

/// Bin index of `v`, snapping quotients within 1e-9 of an integer so that
/// decimal edges like `0.3 / 0.1` land in the bin they name.
fn bin_index(v: f64, width: f64) -> i64 {
    let q = v / width;
    let nearest = libm::round(q);
    if libm::fabs(q - nearest) < 1e-9 {
        nearest as i64
    } else {
        libm::floor(q) as i64
    }
}

pub fn histogram(values: &[f64], bin_width: f64, max_value: f64) -> Result<Histogram> {
    check_open("bin_width", bin_width, 0.0, f64::INFINITY, "positive")?;
    let mut idx: Vec<i64> = Vec::with_capacity(values.len());
    let mut overflow = 0;
    for &v in values {
        if v > max_value {
            overflow += 1;
        } else {
            idx.push(bin_index(v, bin_width));
        }
    }
    idx.sort_unstable();
    let mut bins: Vec<HistogramBin> = Vec::new();
    for chunk in idx.chunk_by(|a, b| a == b) {
        bins.push(HistogramBin {
            lower: chunk[0] as f64 * bin_width,
            count: chunk.len(),
        });
    }
    Ok(Histogram {
        bin_width,
        bins,
        overflow,
    })
}

/// Bandwidth and evaluation grid for [`kde`].
#[derive(Debug, Clone, PartialEq)]
pub struct KdeSpec {
    bandwidth: f64,
    grid: Vec<f64>,
}

impl KdeSpec {
    pub fn new(bandwidth: f64, grid: Vec<f64>) -> Result<Self> {
        check_open("bandwidth", bandwidth, 0.0, f64::INFINITY, "positive")?;
        if grid.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "grid",
                value: f64::NAN,
                constraint: "finite",
            });
        }
        if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter {
                name: "grid",
                value: w[1],
                constraint: "strictly increasing",
            });
        }
        Ok(Self { bandwidth, grid })
    }

    /// Uniform grid `start, start + step, ...` up to and including `end`.
    pub fn uniform(bandwidth: f64, start: f64, end: f64, step: f64) -> Result<Self> {
        check_open("grid step", step, 0.0, f64::INFINITY, "positive")?;
        let n = libm::floor((end - start) / step + 1e-9) as i64;
        let grid = (0..=n.max(0)).map(|i| start + i as f64 * step).collect();
        Self::new(bandwidth, grid)
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `1 / (T h sqrt(2 pi))`, the factor in front of the kernel sum.
    pub fn leading_constant(&self, n_obs: usize) -> f64 {
        1.0 / (n_obs as f64 * self.bandwidth * libm::sqrt(2.0 * PI))
    }

    /// `exp(-1 / (2 h^2))`: each kernel term equals `base^((y - y_t)^2)`.
    pub fn kernel_base(&self) -> f64 {
        libm::exp(-1.0 / (2.0 * self.bandwidth * self.bandwidth))
    }
}

/// Gaussian kernel density estimate at each grid point.
pub fn kde(values: &[f64], spec: &KdeSpec) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    let c = spec.leading_constant(values.len());
    let two_h2 = 2.0 * spec.bandwidth * spec.bandwidth;
    Ok(spec
        .grid
        .iter()
        .map(|&y| {
            let s: f64 = values.iter().map(|&v| libm::exp(-(y - v) * (y - v) / two_h2)).sum();
            (y, c * s)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AcfResult {
    /// `values[j]` is the (partial) autocorrelation at lag `j` months.
    pub values: Vec<f64>,
    /// Half-width of the 95% band, `1.96 / sqrt(T)`.
    pub band: f64,
}

impl AcfResult {
    pub fn lags(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().copied().enumerate()
    }
}

fn band(n: usize) -> f64 {
    1.96 / libm::sqrt(n as f64)
}

pub fn acf(values: &[f64], max_lag: usize) -> Result<AcfResult> {
    if max_lag >= values.len() {
        return Err(Error::LagTooLarge {
            max_lag,
            limit: values.len(),
        });
    }
    let n = values.len();
    let m = mean(values);
    let denom = n as f64 * population_variance(values);
    if !(denom > 0.0) {
        return Err(Error::DegenerateRegressor);
    }
    let dev: Vec<f64> = values.iter().map(|v| v - m).collect();
    let out = (0..=max_lag)
        .map(|j| {
            if j == 0 {
                1.0
            } else {
                dev[j..].iter().zip(&dev).map(|(a, b)| a * b).sum::<f64>() / denom
            }
        })
        .collect();
    Ok(AcfResult {
        values: out,
        band: band(n),
    })
}

/// Partial autocorrelations by the Durbin-Levinson recursion on [`acf`].
/// `values[0]` is 1 by convention.
pub fn pacf(values: &[f64], max_lag: usize) -> Result<AcfResult> {
    let limit = values.len() / 2;
    if max_lag >= limit.max(1) {
        return Err(Error::LagTooLarge { max_lag, limit });
    }
    let r = acf(values, max_lag)?.values;
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    // phi holds the AR(k) coefficients phi_{k,1..k}.
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    let mut v = 1.0;
    for k in 1..=max_lag {
        let num = r[k] - phi.iter().enumerate().map(|(j, p)| p * r[k - 1 - j]).sum::<f64>();
        if !(v > 1e-12) {
            return Err(Error::RecursionBreakdown(k));
        }
        let kk = num / v;
        let prev = phi.clone();
        for j in 0..phi.len() {
            phi[j] = prev[j] - kk * prev[prev.len() - 1 - j];
        }
        phi.push(kk);
        v *= 1.0 - kk * kk;
        out.push(kk);
    }
    Ok(AcfResult {
        values: out,
        band: band(values.len()),
    })
}
