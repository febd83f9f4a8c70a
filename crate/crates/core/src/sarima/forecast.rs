//! Point forecasts and prediction intervals.

use serde::{Deserialize, Serialize};

use super::kalman::{self, StateSpace};
use super::poly;
use super::{FittedModel, SarimaParams, SarimaSpec};
use crate::error::{Error, Result};
use crate::exog::DesignMatrix;
use crate::series::{self, IsoWeek, TimeSeries};
use crate::stats::normal_quantile;

/// Forecasts for consecutive weeks after the training sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub start: IsoWeek,
    pub point: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Standard error of each point forecast.
    pub std_errors: Vec<f64>,
    /// Nominal coverage of `lower..=upper`.
    pub level: f64,
}

impl Forecast {
    pub fn horizon(&self) -> usize {
        self.point.len()
    }

    pub fn week_at(&self, step: usize) -> IsoWeek {
        self.start.offset(step as i64)
    }

    pub fn point_series(&self, period: usize) -> Result<TimeSeries> {
        TimeSeries::new(self.point.clone(), self.start, period)
    }
}

/// MA(infinity) weights of the undifferenced process, including the unit
/// roots of the differencing operator. `psi[0] == 1`.
pub fn psi_weights(spec: &SarimaSpec, params: &SarimaParams, count: usize) -> Result<Vec<f64>> {
    params.check_dims(spec)?;
    let stationary = poly::ar_polynomial(&params.phi, &params.seasonal_phi, spec.period());
    let full = poly::polynomial_product(&stationary, &spec.orders.polynomial());
    let ar: Vec<f64> = full[1..].iter().map(|c| -c).collect();
    let ma = poly::ma_polynomial(&params.theta, &params.seasonal_theta, spec.period());
    Ok(kalman::arma_psi(&ar, &ma[1..], count))
}

/// Forecasts `horizon` steps ahead with central intervals of coverage `level`.
///
/// Models with regressors need `future_exog` with the same columns as the
/// training design and `horizon` rows.
pub fn forecast(
    model: &FittedModel,
    horizon: usize,
    future_exog: Option<&DesignMatrix>,
    level: f64,
) -> Result<Forecast> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("interval level {level} must lie in (0, 1)")));
    }
    if horizon == 0 {
        return Err(Error::Domain("forecast horizon must be positive".into()));
    }
    let spec = &model.spec;
    let x = model.series.values();
    let mut eta = x.to_vec();
    let mut future_mean = vec![0.0; horizon];
    match (&model.design, future_exog) {
        (Some(design), Some(future)) if design.ncols() > 0 => {
            if future.names() != design.names() {
                return Err(Error::Arity(format!(
                    "future regressors {:?} do not match training regressors {:?}",
                    future.names(),
                    design.names()
                )));
            }
            if future.nrows() != horizon {
                return Err(Error::Arity(format!(
                    "future regressors cover {} weeks but the horizon is {horizon}",
                    future.nrows()
                )));
            }
            for (e, m) in eta.iter_mut().zip(design.mul(&model.beta)) {
                *e -= m;
            }
            future_mean = future.mul(&model.beta);
        }
        (Some(design), None) if design.ncols() > 0 => {
            return Err(Error::Arity(format!(
                "model uses regressors {:?}; future values are required",
                design.names()
            )));
        }
        (_, Some(future)) if future.ncols() > 0 => {
            return Err(Error::Arity("future regressors supplied for a model without regressors".into()));
        }
        _ => {}
    }

    let mean = model.mean();
    let w: Vec<f64> = series::difference_values(&eta, &spec.orders)
        .into_iter()
        .map(|v| v - mean)
        .collect();
    let (ar, ma) = poly::expand_polynomials(spec, &model.params)?;
    let ss = StateSpace::new(&ar, &ma).ok_or_else(|| Error::Domain("ARMA autocovariance system is singular".into()))?;
    let out = kalman::filter(&ss, &[&w]).ok_or_else(|| Error::Domain("innovation variance vanished".into()))?;
    let ahead: Vec<f64> = ss.project(&out.next_state[0], horizon).into_iter().map(|v| v + mean).collect();

    let lost = spec.orders.lost();
    let integrated = series::integrate_values(&ahead, &spec.orders, &eta[eta.len() - lost..])?;
    let point: Vec<f64> = integrated[lost..].iter().zip(&future_mean).map(|(a, b)| a + b).collect();

    let psi = psi_weights(spec, &model.params, horizon)?;
    let z = normal_quantile(0.5 + level / 2.0);
    let mut cumulative = 0.0;
    let std_errors: Vec<f64> = psi
        .iter()
        .map(|p| {
            cumulative += p * p;
            (model.params.sigma2 * cumulative).sqrt()
        })
        .collect();
    Ok(Forecast {
        start: model.series.end().offset(1),
        lower: point.iter().zip(&std_errors).map(|(p, s)| p - z * s).collect(),
        upper: point.iter().zip(&std_errors).map(|(p, s)| p + z * s).collect(),
        point,
        std_errors,
        level,
    })
}
