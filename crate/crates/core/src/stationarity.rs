//! KPSS level-stationarity test and automatic choice of differencing orders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{self, DifferencingOrders, TimeSeries};

/// Asymptotic upper-tail critical values of the level-stationarity KPSS
/// statistic, as (statistic, significance) pairs in increasing statistic order.
pub const KPSS_CRITICAL_VALUES: [(f64, f64); 4] =
    [(0.347, 0.10), (0.463, 0.05), (0.574, 0.025), (0.739, 0.01)];

const KPSS_MIN_LEN: usize = 12;

/// Truncation lag of the Bartlett long-run variance estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LagRule {
    /// `floor(4 (n/100)^(1/4))`.
    #[default]
    Short,
    /// `floor(12 (n/100)^(1/4))`.
    Long,
    Fixed(usize),
}

impl LagRule {
    pub fn lags(self, n: usize) -> usize {
        let root = (n as f64 / 100.0).powf(0.25);
        match self {
            LagRule::Short => (4.0 * root).floor() as usize,
            LagRule::Long => (12.0 * root).floor() as usize,
            LagRule::Fixed(l) => l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpssResult {
    pub statistic: f64,
    /// Interpolated p-value, clamped to `[0.01, 0.10]`.
    pub p_value_band: f64,
    pub lags_used: usize,
    pub stationary_at_5pct: bool,
}

/// Interpolates the p-value of a KPSS statistic in the critical-value table.
pub fn kpss_p_value(statistic: f64) -> f64 {
    let table = KPSS_CRITICAL_VALUES;
    if statistic <= table[0].0 {
        return table[0].1;
    }
    for pair in table.windows(2) {
        let (s0, p0) = pair[0];
        let (s1, p1) = pair[1];
        if statistic <= s1 {
            return p0 + (statistic - s0) / (s1 - s0) * (p1 - p0);
        }
    }
    table[table.len() - 1].1
}

/// Level-stationarity KPSS test with the short Bartlett truncation rule.
pub fn kpss_test(series: &TimeSeries) -> Result<KpssResult> {
    kpss_test_with(series, LagRule::Short)
}

pub fn kpss_test_with(series: &TimeSeries, rule: LagRule) -> Result<KpssResult> {
    kpss_values(series.values(), rule)
}

pub(crate) fn kpss_values(values: &[f64], rule: LagRule) -> Result<KpssResult> {
    let n = values.len();
    if n < KPSS_MIN_LEN {
        return Err(Error::TooShort {
            context: "KPSS test",
            required: KPSS_MIN_LEN,
            actual: n,
        });
    }
    let lags = rule.lags(n).min(n - 1);
    let gamma = series::autocovariances(values, lags);
    let long_run: f64 = gamma[0]
        + 2.0
            * (1..=lags)
                .map(|j| (1.0 - j as f64 / (lags as f64 + 1.0)) * gamma[j])
                .sum::<f64>();
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if long_run <= f64::EPSILON * scale * scale {
        return Err(Error::Degenerate(
            "KPSS long-run variance is zero (constant series)".into(),
        ));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut partial = 0.0;
    let mut sum_sq = 0.0;
    for v in values {
        partial += v - mean;
        sum_sq += partial * partial;
    }
    let statistic = sum_sq / (n as f64 * n as f64) / long_run;
    Ok(KpssResult {
        statistic,
        p_value_band: kpss_p_value(statistic),
        lags_used: lags,
        stationary_at_5pct: statistic < KPSS_CRITICAL_VALUES[1].0,
    })
}

/// Tuning for [`suggest_differencing_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferencingRule {
    /// Seasonal differencing is applied when the lag-S sample
    /// autocorrelation exceeds this threshold.
    pub seasonal_acf_threshold: f64,
    pub max_d: usize,
    pub lag_rule: LagRule,
}

impl Default for DifferencingRule {
    fn default() -> Self {
        Self {
            seasonal_acf_threshold: 0.5,
            max_d: DifferencingOrders::MAX_D,
            lag_rule: LagRule::Short,
        }
    }
}

pub fn suggest_differencing(series: &TimeSeries, period: usize) -> Result<DifferencingOrders> {
    suggest_differencing_with(series, period, &DifferencingRule::default())
}

/// Seasonal differencing once if the lag-`period` autocorrelation is strong,
/// then regular differencing until KPSS no longer rejects at 5%.
pub fn suggest_differencing_with(
    series: &TimeSeries,
    period: usize,
    rule: &DifferencingRule,
) -> Result<DifferencingOrders> {
    if period == 0 {
        return Err(Error::Domain("seasonal period must be at least 1".into()));
    }
    if series.len() <= 2 * period {
        return Err(Error::TooShort {
            context: "differencing suggestion",
            required: 2 * period + 1,
            actual: series.len(),
        });
    }
    let seasonal_d = if period > 1 {
        let rho = series::acf(series, period)?;
        usize::from(rho[period] > rule.seasonal_acf_threshold)
    } else {
        0
    };
    let mut last = None;
    for d in 0..=rule.max_d.min(DifferencingOrders::MAX_D) {
        let orders = DifferencingOrders::new(d, seasonal_d, period)?;
        let differenced = series::difference(series, &orders)?;
        let result = kpss_test_with(&differenced, rule.lag_rule)?;
        if result.stationary_at_5pct {
            return Ok(orders);
        }
        last = Some(result);
    }
    Err(Error::NonStationarizable {
        max_d: rule.max_d,
        statistic: last.map_or(f64::NAN, |r| r.statistic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_rule_lags() {
        assert_eq!(LagRule::Short.lags(500), 5);
        assert_eq!(LagRule::Short.lags(100), 4);
        assert_eq!(LagRule::Long.lags(100), 12);
    }

    #[test]
    fn p_value_interpolation() {
        assert_eq!(kpss_p_value(0.1), 0.10);
        assert_eq!(kpss_p_value(0.463), 0.05);
        assert_eq!(kpss_p_value(2.0), 0.01);
        let mid = kpss_p_value((0.347 + 0.463) / 2.0);
        assert!((mid - 0.075).abs() < 1e-12);
    }

    #[test]
    fn too_short() {
        let s = TimeSeries::from_values(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(kpss_test(&s), Err(Error::TooShort { .. })));
    }

    #[test]
    fn constant_is_degenerate() {
        let s = TimeSeries::from_values(vec![4.0; 50]).unwrap();
        assert!(matches!(kpss_test(&s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn linear_trend_rejects() {
        let s = TimeSeries::from_values((0..200).map(|t| t as f64).collect()).unwrap();
        let r = kpss_test(&s).unwrap();
        assert!(!r.stationary_at_5pct);
        assert_eq!(r.p_value_band, 0.01);
    }

    #[test]
    fn suggestion_needs_two_cycles() {
        let s = TimeSeries::from_values((0..20).map(|t| (t % 7) as f64).collect()).unwrap();
        assert!(matches!(
            suggest_differencing(&s, 10),
            Err(Error::TooShort { .. })
        ));
    }
}
