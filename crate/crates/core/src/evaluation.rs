//! Forecast accuracy and residual diagnostics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{self, TimeSeries};
use crate::stats::normal_quantile;

fn check_pair(forecast: &[f64], actual: &[f64]) -> Result<()> {
    if forecast.len() != actual.len() {
        return Err(Error::Arity(format!(
            "{} forecasts against {} actual values",
            forecast.len(),
            actual.len()
        )));
    }
    if forecast.is_empty() {
        return Err(Error::Arity("no forecast/actual pairs".into()));
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(forecast: &[f64], actual: &[f64]) -> Result<f64> {
    check_pair(forecast, actual)?;
    let total: f64 = forecast.iter().zip(actual).map(|(f, x)| (f - x).abs()).sum();
    Ok(total / forecast.len() as f64)
}

/// Mean absolute percentage error, in percent.
pub fn mape(forecast: &[f64], actual: &[f64]) -> Result<f64> {
    check_pair(forecast, actual)?;
    if let Some(i) = actual.iter().position(|x| *x == 0.0) {
        return Err(Error::Domain(format!("actual value {i} is zero; MAPE is undefined")));
    }
    let total: f64 = forecast.iter().zip(actual).map(|(f, x)| ((f - x) / x).abs()).sum();
    Ok(total / forecast.len() as f64 * 100.0)
}

/// Relative reduction of an error measure, in percent.
///
/// ```
/// let imp = peakload::improvement_pct(3742.0, 1724.0).unwrap();
/// assert_eq!(format!("{imp:.1}"), "53.9");
/// ```
pub fn improvement_pct(crude: f64, hybrid: f64) -> Result<f64> {
    if !(crude > 0.0) {
        return Err(Error::Domain(format!("baseline error {crude} must be positive")));
    }
    Ok((crude - hybrid) / crude * 100.0)
}

/// MAE and MAPE over one forecast horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub mae: f64,
    pub mape: f64,
    pub h: usize,
}

impl AccuracyReport {
    pub fn compute(forecast: &[f64], actual: &[f64]) -> Result<Self> {
        Ok(Self {
            mae: mae(forecast, actual)?,
            mape: mape(forecast, actual)?,
            h: forecast.len(),
        })
    }
}

/// Residual autocorrelations against the white-noise band plus normal QQ
/// points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDiagnostics {
    /// Autocorrelations at lags `1..=max_lag`.
    pub acf_values: Vec<f64>,
    pub band: f64,
    pub lags_outside_band: Vec<usize>,
    /// `(theoretical, sample)` pairs in increasing order.
    pub qq_points: Vec<(f64, f64)>,
}

impl ResidualDiagnostics {
    /// `lag,acf,band` rows.
    pub fn acf_csv(&self) -> String {
        let mut out = String::from("lag,acf,band\n");
        for (i, v) in self.acf_values.iter().enumerate() {
            let _ = writeln!(out, "{},{v:?},{:?}", i + 1, self.band);
        }
        out
    }

    /// `theoretical,sample` rows.
    pub fn qq_csv(&self) -> String {
        let mut out = String::from("theoretical,sample\n");
        for (t, s) in &self.qq_points {
            let _ = writeln!(out, "{t:?},{s:?}");
        }
        out
    }
}

/// Diagnostics with the usual 95% band `1.96 / sqrt(n)`.
pub fn residual_diagnostics(residuals: &TimeSeries, max_lag: usize) -> Result<ResidualDiagnostics> {
    residual_diagnostics_at(residuals, max_lag, 0.95)
}

/// Diagnostics with a band at the given two-sided level. Residuals are
/// assumed standardized already; QQ positions are `(i - 0.5) / n`.
pub fn residual_diagnostics_at(residuals: &TimeSeries, max_lag: usize, level: f64) -> Result<ResidualDiagnostics> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("band level {level} must lie in (0, 1)")));
    }
    let values = residuals.values();
    let n = values.len();
    let acf = series::acf_values(values, max_lag)?;
    let band = normal_quantile(0.5 + level / 2.0) / (n as f64).sqrt();
    let acf_values = acf[1..].to_vec();
    let lags_outside_band = acf_values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > band)
        .map(|(i, _)| i + 1)
        .collect();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let qq_points = sorted
        .into_iter()
        .enumerate()
        .map(|(i, s)| (normal_quantile((i as f64 + 0.5) / n as f64), s))
        .collect();
    Ok(ResidualDiagnostics {
        acf_values,
        band,
        lags_outside_band,
        qq_points,
    })
}

/// Mean of already-rounded values, printed at the same number of decimals.
///
/// ```
/// assert_eq!(peakload::evaluation::rounded_mean(&[2.59, 3.37, 4.38], 2), "3.45");
/// ```
pub fn rounded_mean(values: &[f64], decimals: usize) -> String {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    format!("{mean:.decimals$}")
}
