//! Exact Gaussian log-likelihood of regression with SARIMA errors.

use std::f64::consts::PI;

use super::kalman::{self, FilterOutput, StateSpace};
use super::poly;
use super::{SarimaParams, SarimaSpec};
use crate::error::{Error, Result};
use crate::exog::DesignMatrix;
use crate::linalg;
use crate::series::{self, TimeSeries};

/// Differenced response and regressors seen by the ARMA likelihood.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub response: Vec<f64>,
    /// Differenced design columns, followed by a constant when the spec has
    /// an intercept.
    pub regressors: Vec<Vec<f64>>,
    pub names: Vec<String>,
}

pub(crate) const INTERCEPT_NAME: &str = "intercept";

pub(crate) fn check_inputs(series: &TimeSeries, spec: &SarimaSpec, exog: Option<&DesignMatrix>) -> Result<()> {
    spec.validate()?;
    let need = spec.min_length();
    if series.len() < need {
        return Err(Error::TooShort {
            context: "SARIMA likelihood",
            required: need,
            actual: series.len(),
        });
    }
    if let Some(design) = exog {
        if design.nrows() != series.len() {
            return Err(Error::Arity(format!(
                "design has {} rows but the series has {} observations",
                design.nrows(),
                series.len()
            )));
        }
    }
    Ok(())
}

pub(crate) fn prepare(series: &TimeSeries, spec: &SarimaSpec, exog: Option<&DesignMatrix>) -> Result<Prepared> {
    check_inputs(series, spec, exog)?;
    let response = series::difference_values(series.values(), &spec.orders);
    let mut regressors = Vec::new();
    let mut names = Vec::new();
    if let Some(design) = exog {
        for (name, col) in design.names().iter().zip(design.columns()) {
            regressors.push(series::difference_values(col, &spec.orders));
            names.push(name.clone());
        }
    }
    if spec.include_intercept {
        regressors.push(vec![1.0; response.len()]);
        names.push(INTERCEPT_NAME.to_string());
    }
    let dependent = linalg::dependent_columns(&regressors);
    if !dependent.is_empty() {
        return Err(Error::Collinear {
            columns: dependent.into_iter().map(|i| names[i].clone()).collect(),
        });
    }
    Ok(Prepared {
        response,
        regressors,
        names,
    })
}

/// Likelihood with the regression coefficients and innovation variance
/// replaced by their closed-form maximizers for fixed ARMA coefficients.
#[derive(Debug, Clone)]
pub(crate) struct Profile {
    pub loglik: f64,
    pub sigma2: f64,
    /// Coefficients in the order of [`Prepared::regressors`].
    pub coefficients: Vec<f64>,
    /// Innovations divided by their standard deviations.
    pub standardized: Vec<f64>,
}

/// Smallest innovation variance reported; exactly fitted series would
/// otherwise give an infinite likelihood.
const SIGMA2_FLOOR: f64 = 1e-300;

pub(crate) fn profile(ss: &StateSpace, data: &Prepared) -> Option<Profile> {
    let mut columns: Vec<&[f64]> = vec![&data.response];
    columns.extend(data.regressors.iter().map(Vec::as_slice));
    let out = kalman::filter(ss, &columns)?;
    profile_from_filter(&out)
}

fn profile_from_filter(out: &FilterOutput) -> Option<Profile> {
    let n = out.variances.len();
    let root: Vec<f64> = out.variances.iter().map(|f| f.sqrt()).collect();
    let scale = |v: &[f64]| -> Vec<f64> { v.iter().zip(&root).map(|(x, s)| x / s).collect() };
    let y = scale(&out.innovations[0]);
    let xs: Vec<Vec<f64>> = out.innovations[1..].iter().map(|c| scale(c)).collect();
    let ls = linalg::least_squares(&xs, &y)?;
    let rss: f64 = ls.residuals.iter().map(|e| e * e).sum();
    let sigma2 = (rss / n as f64).max(SIGMA2_FLOOR);
    let loglik = -0.5 * n as f64 * ((2.0 * PI * sigma2).ln() + 1.0) - 0.5 * out.log_det();
    if !loglik.is_finite() {
        return None;
    }
    let sd = sigma2.sqrt();
    Some(Profile {
        loglik,
        sigma2,
        coefficients: ls.coefficients,
        standardized: ls.residuals.iter().map(|e| e / sd).collect(),
    })
}

/// Exact log-likelihood of `series` under the given SARIMA parameters and
/// regression coefficients.
///
/// The series (and each design column) is differenced, the regression mean
/// and intercept are removed, and the remaining ARMA process is evaluated by
/// the prediction-error decomposition with stationary initialization.
pub fn loglikelihood(
    series: &TimeSeries,
    spec: &SarimaSpec,
    params: &SarimaParams,
    exog: Option<&DesignMatrix>,
    beta: Option<&[f64]>,
) -> Result<f64> {
    params.validate(spec)?;
    check_inputs(series, spec, exog)?;
    let ncols = exog.map_or(0, DesignMatrix::ncols);
    let beta = beta.unwrap_or(&[]);
    if beta.len() != ncols {
        return Err(Error::Arity(format!(
            "{} regression coefficients for {ncols} design columns",
            beta.len()
        )));
    }
    let mut adjusted = series.values().to_vec();
    if let Some(design) = exog {
        for (x, m) in adjusted.iter_mut().zip(design.mul(beta)) {
            *x -= m;
        }
    }
    let mean = if spec.include_intercept { params.mean() } else { 0.0 };
    let w: Vec<f64> = series::difference_values(&adjusted, &spec.orders)
        .into_iter()
        .map(|v| v - mean)
        .collect();
    let (ar, ma) = poly::expand_polynomials(spec, params)?;
    let ss = StateSpace::new(&ar, &ma)
        .ok_or_else(|| Error::Domain("ARMA autocovariance system is singular".into()))?;
    let out = kalman::filter(&ss, &[&w])
        .ok_or_else(|| Error::Domain("innovation variance vanished during filtering".into()))?;
    let n = w.len() as f64;
    let quad: f64 = out.innovations[0]
        .iter()
        .zip(&out.variances)
        .map(|(v, f)| v * v / f)
        .sum();
    Ok(-0.5 * (n * (2.0 * PI * params.sigma2).ln() + out.log_det() + quad / params.sigma2))
}
