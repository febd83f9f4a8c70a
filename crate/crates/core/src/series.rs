//! Weekly time series, differencing operators and sample autocorrelations.
//!
//! Series are indexed on a 52-week calendar: every ISO year contributes
//! weeks 1 through 52 (the ingestion layer folds ISO week 53 into week 52),
//! so week arithmetic is plain integer arithmetic on `year * 52 + week - 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weeks per year on the folded calendar.
pub const WEEKS_PER_YEAR: i64 = 52;

/// A week on the folded 52-week ISO calendar, written `YYYY-Www`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct IsoWeek {
    year: i32,
    week: u32,
}

impl IsoWeek {
    /// Builds a week label; `week` must lie in `1..=52`.
    pub fn new(year: i32, week: u32) -> Result<Self> {
        if !(1..=WEEKS_PER_YEAR as u32).contains(&week) {
            return Err(Error::Domain(format!(
                "week {week} outside 1..=52 on the folded calendar"
            )));
        }
        Ok(Self { year, week })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn week(self) -> u32 {
        self.week
    }

    /// Absolute week number; consecutive weeks differ by exactly one.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * WEEKS_PER_YEAR + (self.week as i64 - 1)
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        let year = ordinal.div_euclid(WEEKS_PER_YEAR);
        let week = ordinal.rem_euclid(WEEKS_PER_YEAR) + 1;
        Self {
            year: year as i32,
            week: week as u32,
        }
    }

    /// The week `offset` weeks later (or earlier, for negative offsets).
    pub fn offset(self, offset: i64) -> Self {
        Self::from_ordinal(self.ordinal() + offset)
    }

    /// Signed number of weeks from `self` to `other`.
    pub fn weeks_until(self, other: IsoWeek) -> i64 {
        other.ordinal() - self.ordinal()
    }
}

impl Default for IsoWeek {
    fn default() -> Self {
        Self {
            year: 2000,
            week: 1,
        }
    }
}

impl fmt::Display for IsoWeek {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-W{:02}", self.year, self.week)
    }
}

/// Parses `YYYY-Www`. Week 53 is rejected here; callers that accept raw ISO
/// labels fold it first (see [`parse_raw_iso_week`]).
impl FromStr for IsoWeek {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (year, week) = parse_raw_iso_week(s)?;
        IsoWeek::new(year, week)
    }
}

impl TryFrom<String> for IsoWeek {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<IsoWeek> for String {
    fn from(value: IsoWeek) -> Self {
        value.to_string()
    }
}

/// Splits a `YYYY-Www` label into (year, week) allowing week 53.
pub fn parse_raw_iso_week(s: &str) -> Result<(i32, u32)> {
    let bad = || Error::Parse {
        line: 0,
        message: format!("expected YYYY-Www, got {s:?}"),
    };
    let (year, week) = s.trim().split_once("-W").ok_or_else(bad)?;
    let year: i32 = year.parse().map_err(|_| bad())?;
    let week: u32 = week.parse().map_err(|_| bad())?;
    if !(1..=53).contains(&week) {
        return Err(bad());
    }
    Ok((year, week))
}

/// Regularly spaced observations with a start week and a seasonal period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    start: IsoWeek,
    period: usize,
}

impl TimeSeries {
    /// Values must be nonempty and finite, and `period >= 1`.
    pub fn new(values: Vec<f64>, start: IsoWeek, period: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooShort {
                context: "time series",
                required: 1,
                actual: 0,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value {} at position {i}",
                values[i]
            )));
        }
        if period == 0 {
            return Err(Error::Domain("seasonal period must be at least 1".into()));
        }
        Ok(Self {
            values,
            start,
            period,
        })
    }

    /// Series starting at the default week with period 1.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, IsoWeek::default(), 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start(&self) -> IsoWeek {
        self.start
    }

    /// Week of the last observation.
    pub fn end(&self) -> IsoWeek {
        self.start.offset(self.values.len() as i64 - 1)
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn with_period(mut self, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::Domain("seasonal period must be at least 1".into()));
        }
        self.period = period;
        Ok(self)
    }

    /// Week label of observation `i`.
    pub fn week_at(&self, i: usize) -> IsoWeek {
        self.start.offset(i as i64)
    }

    /// Sub-series `[from, to)` with the start week shifted accordingly.
    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        if from >= to || to > self.values.len() {
            return Err(Error::Span(format!(
                "slice {from}..{to} invalid for series of length {}",
                self.values.len()
            )));
        }
        Self::new(
            self.values[from..to].to_vec(),
            self.week_at(from),
            self.period,
        )
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Regular order `d`, seasonal order `D` and seasonal lag `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DifferencingOrders {
    pub d: usize,
    #[serde(rename = "D")]
    pub seasonal_d: usize,
    #[serde(rename = "S")]
    pub period: usize,
}

impl DifferencingOrders {
    pub const MAX_D: usize = 2;
    pub const MAX_SEASONAL_D: usize = 1;

    pub fn new(d: usize, seasonal_d: usize, period: usize) -> Result<Self> {
        let orders = Self {
            d,
            seasonal_d,
            period,
        };
        orders.validate()?;
        Ok(orders)
    }

    /// No differencing at all, with period 1.
    pub fn none() -> Self {
        Self {
            d: 0,
            seasonal_d: 0,
            period: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::Domain("seasonal lag S must be at least 1".into()));
        }
        if self.d > Self::MAX_D {
            return Err(Error::Domain(format!("d = {} exceeds cap 2", self.d)));
        }
        if self.seasonal_d > Self::MAX_SEASONAL_D {
            return Err(Error::Domain(format!(
                "D = {} exceeds cap 1",
                self.seasonal_d
            )));
        }
        Ok(())
    }

    /// Observations consumed by differencing, `d + D*S`.
    pub fn lost(&self) -> usize {
        self.d + self.seasonal_d * self.period
    }

    /// Lags of the elementary difference operators in application order:
    /// seasonal first, then regular.
    fn lags(&self) -> Vec<usize> {
        let mut lags = vec![self.period; self.seasonal_d];
        lags.extend(std::iter::repeat_n(1, self.d));
        lags
    }

    /// Coefficients of `(1-B)^d (1-B^S)^D` as a polynomial in `B`,
    /// constant term first.
    pub fn polynomial(&self) -> Vec<f64> {
        let mut poly = vec![1.0];
        for lag in self.lags() {
            let mut next = vec![0.0; poly.len() + lag];
            for (i, c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + lag] -= c;
            }
            poly = next;
        }
        poly
    }
}

fn lag_difference(values: &[f64], lag: usize) -> Vec<f64> {
    values
        .iter()
        .skip(lag)
        .zip(values)
        .map(|(x, prev)| x - prev)
        .collect()
}

pub(crate) fn difference_values(values: &[f64], orders: &DifferencingOrders) -> Vec<f64> {
    orders
        .lags()
        .into_iter()
        .fold(values.to_vec(), |acc, lag| lag_difference(&acc, lag))
}

/// Applies `(1-B^S)^D` and then `(1-B)^d`.
pub fn difference(series: &TimeSeries, orders: &DifferencingOrders) -> Result<TimeSeries> {
    orders.validate()?;
    let lost = orders.lost();
    if series.len() <= lost {
        return Err(Error::TooShort {
            context: "differencing",
            required: lost + 1,
            actual: series.len(),
        });
    }
    TimeSeries::new(
        difference_values(series.values(), orders),
        series.start().offset(lost as i64),
        series.period(),
    )
}

pub(crate) fn integrate_values(
    differenced: &[f64],
    orders: &DifferencingOrders,
    initial_values: &[f64],
) -> Result<Vec<f64>> {
    orders.validate()?;
    let lost = orders.lost();
    if initial_values.len() != lost {
        return Err(Error::Arity(format!(
            "integration with d={}, D={}, S={} needs exactly {lost} initial values, got {}",
            orders.d,
            orders.seasonal_d,
            orders.period,
            initial_values.len()
        )));
    }
    // Heads of every intermediate level, obtained by differencing the
    // pre-sample values forward.
    let lags = orders.lags();
    let mut heads = vec![initial_values.to_vec()];
    for &lag in &lags {
        let next = lag_difference(heads.last().unwrap(), lag);
        heads.push(next);
    }
    // Full series at the deepest level: its pre-sample head is empty.
    let mut level: Vec<f64> = heads.last().unwrap().iter().chain(differenced).copied().collect();
    for (k, &lag) in lags.iter().enumerate().rev() {
        // Level k is recovered from its first `lag` values and level k+1.
        let mut rebuilt = Vec::with_capacity(level.len() + lag);
        rebuilt.extend_from_slice(&heads[k][..lag]);
        for (t, v) in level.into_iter().enumerate() {
            let prev = rebuilt[t];
            rebuilt.push(prev + v);
        }
        level = rebuilt;
    }
    Ok(level)
}

/// Inverse of [`difference`]: rebuilds the undifferenced series from the
/// differenced values and the `d + D*S` observations that precede them.
///
/// The output starts with `initial_values`, so
/// `integrate(difference(x), orders, head(x))` reproduces `x`.
pub fn integrate(
    differenced: &TimeSeries,
    orders: &DifferencingOrders,
    initial_values: &[f64],
) -> Result<TimeSeries> {
    let values = integrate_values(differenced.values(), orders, initial_values)?;
    TimeSeries::new(
        values,
        differenced.start().offset(-(orders.lost() as i64)),
        differenced.period(),
    )
}

/// Sample autocovariances at lags `0..=max_lag` with divisor `n`.
pub(crate) fn autocovariances(values: &[f64], max_lag: usize) -> Vec<f64> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    (0..=max_lag)
        .map(|lag| {
            centered[lag..]
                .iter()
                .zip(&centered)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Sample autocorrelations `rho(0..=max_lag)`, with `rho(0) = 1`.
pub fn acf(series: &TimeSeries, max_lag: usize) -> Result<Vec<f64>> {
    acf_values(series.values(), max_lag)
}

pub(crate) fn acf_values(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= values.len() {
        return Err(Error::LagOutOfRange {
            lag: max_lag,
            len: values.len(),
        });
    }
    let gamma = autocovariances(values, max_lag);
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if gamma[0] <= f64::EPSILON * scale * scale {
        return Err(Error::Degenerate(
            "zero-variance series has no autocorrelation".into(),
        ));
    }
    Ok(gamma.iter().map(|g| g / gamma[0]).collect())
}

/// Durbin-Levinson recursion on an autocorrelation sequence.
///
/// Returns the partial autocorrelations at lags `1..rho.len()` together with
/// the final prediction coefficients.
pub(crate) fn durbin_levinson(rho: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let max_lag = rho.len().saturating_sub(1);
    let mut partials = Vec::with_capacity(max_lag);
    let mut coeffs: Vec<f64> = Vec::with_capacity(max_lag);
    let mut error = 1.0;
    for k in 1..=max_lag {
        let num = rho[k]
            - coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| c * rho[k - 1 - j])
                .sum::<f64>();
        let kappa = if error > 0.0 { num / error } else { 0.0 };
        let prev = coeffs.clone();
        for j in 0..coeffs.len() {
            coeffs[j] = prev[j] - kappa * prev[prev.len() - 1 - j];
        }
        coeffs.push(kappa);
        error *= 1.0 - kappa * kappa;
        partials.push(kappa);
    }
    (partials, coeffs)
}

/// Partial autocorrelations at lags `1..=max_lag`.
pub fn pacf(series: &TimeSeries, max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(series, max_lag)?;
    Ok(durbin_levinson(&rho).0)
}
