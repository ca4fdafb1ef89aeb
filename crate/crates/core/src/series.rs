//! Monthly rate series, unit conventions and summary statistics.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// A calendar month. Ordering is chronological.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct YearMonth {
    year: i32,
    month: u8,
}

impl YearMonth {
    /// `month` is 1-based.
    pub fn new(year: i32, month: u8) -> Option<Self> {
        (1..=12).contains(&month).then_some(Self { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    /// Months since January of year 0.
    fn ordinal(self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    fn from_ordinal(ordinal: i64) -> Self {
        Self {
            year: ordinal.div_euclid(12) as i32,
            month: (ordinal.rem_euclid(12) + 1) as u8,
        }
    }

    /// The month `n` months later.
    pub fn plus(self, n: i64) -> Self {
        Self::from_ordinal(self.ordinal() + n)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseYearMonthError;

impl fmt::Display for ParseYearMonthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected a YYYY-MM date")
    }
}

impl FromStr for YearMonth {
    type Err = ParseYearMonthError;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        let (y, m) = s.trim().split_once('-').ok_or(ParseYearMonthError)?;
        if y.len() != 4 || m.len() != 2 || !y.bytes().chain(m.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(ParseYearMonthError);
        }
        let year = y.parse().map_err(|_| ParseYearMonthError)?;
        let month = m.parse().map_err(|_| ParseYearMonthError)?;
        Self::new(year, month).ok_or(ParseYearMonthError)
    }
}

/// How the values of a series are quoted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Units {
    /// Simple annual rate in percent.
    NominalPercent,
    /// Continuously-compounded annual rate in percent, `100 ln(1 + rate/100)`.
    ContinuousPercent,
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Units::NominalPercent => "nominal-percent",
            Units::ContinuousPercent => "continuous-percent",
        })
    }
}

/// Nominal percent to continuously-compounded percent.
pub fn continuous_rate(nominal: f64) -> f64 {
    100.0 * libm::log1p(nominal / 100.0)
}

/// Inverse of [`continuous_rate`].
pub fn nominal_rate(continuous: f64) -> f64 {
    100.0 * libm::expm1(continuous / 100.0)
}

/// An unbroken run of monthly observations.
///
/// Construction sorts by date and then checks that months are consecutive,
/// unique and that every value is finite and above -100%. Because the months
/// are contiguous only the first month is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    label: String,
    units: Units,
    start: Option<YearMonth>,
    values: Vec<f64>,
}

impl RateSeries {
    pub fn new(label: impl Into<String>, units: Units, mut observations: Vec<(YearMonth, f64)>) -> Result<Self> {
        observations.sort_by_key(|&(m, _)| m);
        for pair in observations.windows(2) {
            let (before, after) = (pair[0].0, pair[1].0);
            if before == after {
                return Err(Error::DuplicateMonth(after));
            }
            if after.ordinal() != before.ordinal() + 1 {
                return Err(Error::MonthGap { before, after });
            }
        }
        for &(month, value) in &observations {
            if !value.is_finite() {
                return Err(Error::NonFinite(month));
            }
            if value <= -100.0 {
                return Err(Error::BelowMinusHundred { month, value });
            }
        }
        Ok(Self {
            label: label.into(),
            units,
            start: observations.first().map(|&(m, _)| m),
            values: observations.into_iter().map(|(_, v)| v).collect(),
        })
    }

    /// Builds a series from consecutive values starting at `start`.
    pub fn from_values(label: impl Into<String>, units: Units, start: YearMonth, values: Vec<f64>) -> Result<Self> {
        let obs = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| (start.plus(i as i64), v))
            .collect();
        Self::new(label, units, obs)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start(&self) -> Option<YearMonth> {
        self.start
    }

    pub fn months(&self) -> impl Iterator<Item = YearMonth> + '_ {
        let start = self.start;
        (0..self.values.len()).filter_map(move |i| start.map(|s| s.plus(i as i64)))
    }

    pub(crate) fn require_units(&self, expected: Units) -> Result<()> {
        if self.units == expected {
            Ok(())
        } else {
            Err(Error::WrongUnits {
                expected,
                actual: self.units,
            })
        }
    }

    /// Converts a nominal series to continuously-compounded percent.
    ///
    /// Calling this on a series that is already continuous is an error: it
    /// almost always means the units flag was set wrong upstream.
    pub fn to_continuous(&self) -> Result<Self> {
        self.require_units(Units::NominalPercent)?;
        Ok(Self {
            label: self.label.clone(),
            units: Units::ContinuousPercent,
            start: self.start,
            values: self.values.iter().map(|&v| continuous_rate(v)).collect(),
        })
    }

    pub fn to_nominal(&self) -> Result<Self> {
        self.require_units(Units::ContinuousPercent)?;
        Ok(Self {
            label: self.label.clone(),
            units: Units::NominalPercent,
            start: self.start,
            values: self.values.iter().map(|&v| nominal_rate(v)).collect(),
        })
    }

    pub fn summarize(&self) -> Result<SummaryStats> {
        summarize(&self.values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Population standard deviation (divisor `count`).
    pub std_dev: f64,
    /// Mean absolute deviation about the mean.
    pub mean_abs_dev: f64,
    pub p5: f64,
    pub median: f64,
    pub p95: f64,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance about the sample mean.
pub fn population_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

/// Percentile of already-sorted data by linear interpolation between order
/// statistics: position `p * (n - 1)`, `p` in `[0, 1]`.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub(crate) fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    let sorted = sorted_copy(values);
    let m = mean(values);
    Ok(SummaryStats {
        count: values.len(),
        mean: m,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        std_dev: libm::sqrt(population_variance(values)),
        mean_abs_dev: values.iter().map(|v| libm::fabs(v - m)).sum::<f64>() / values.len() as f64,
        p5: percentile_sorted(&sorted, 0.05),
        median: percentile_sorted(&sorted, 0.50),
        p95: percentile_sorted(&sorted, 0.95),
    })
}
