//! Seasonal ARIMA models with an optional regression mean.
//!
//! The model for an observed series `x_t` with regressors `z_t` is
//!
//! ```text
//! x_t = beta' z_t + eta_t
//! Phi(B^S) phi(B) (1-B^S)^D (1-B)^d eta_t = delta + Theta(B^S) theta(B) w_t
//! ```
//!
//! with `w_t` Gaussian white noise of variance `sigma2`. Estimation works on
//! the differenced series, whose stationary ARMA part is evaluated exactly by
//! a Kalman filter over the multiplied-out polynomials.

mod fit;
mod forecast;
mod kalman;
mod likelihood;
mod optim;
mod poly;
mod simulate;
pub(crate) mod transform;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::DifferencingOrders;

pub use fit::{fit, fit_with, FitOptions, FittedModel};
pub use forecast::{forecast, psi_weights, Forecast};
pub use likelihood::loglikelihood;
pub use poly::{evaluate_polynomial, expand_polynomials, polynomial_product};
pub use simulate::simulate;

/// Orders of a SARIMA(p,d,q)x(P,D,Q)_S model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SarimaSpec {
    pub p: usize,
    pub q: usize,
    #[serde(rename = "P")]
    pub seasonal_p: usize,
    #[serde(rename = "Q")]
    pub seasonal_q: usize,
    pub orders: DifferencingOrders,
    /// Whether `delta` is estimated.
    pub include_intercept: bool,
}

impl SarimaSpec {
    /// Non-seasonal ARIMA(p,d,q); the intercept is included when `d == 0`.
    pub fn arima(p: usize, d: usize, q: usize) -> Self {
        Self {
            p,
            q,
            seasonal_p: 0,
            seasonal_q: 0,
            orders: DifferencingOrders {
                d,
                seasonal_d: 0,
                period: 1,
            },
            include_intercept: d == 0,
        }
    }

    /// Adds the seasonal part and resets the intercept default to `d + D == 0`.
    pub fn seasonal(mut self, seasonal_p: usize, seasonal_d: usize, seasonal_q: usize, period: usize) -> Self {
        self.seasonal_p = seasonal_p;
        self.seasonal_q = seasonal_q;
        self.orders.seasonal_d = seasonal_d;
        self.orders.period = period;
        self.include_intercept = self.orders.d + seasonal_d == 0;
        self
    }

    /// ARMA orders on top of fixed differencing, intercept by the `d + D == 0` rule.
    pub fn with_orders(orders: DifferencingOrders, p: usize, q: usize, seasonal_p: usize, seasonal_q: usize) -> Self {
        Self {
            p,
            q,
            seasonal_p,
            seasonal_q,
            orders,
            include_intercept: orders.d + orders.seasonal_d == 0,
        }
    }

    pub fn with_intercept(mut self, include: bool) -> Self {
        self.include_intercept = include;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.orders.validate()?;
        if self.orders.period == 1 && (self.seasonal_p > 0 || self.seasonal_q > 0 || self.orders.seasonal_d > 0) {
            return Err(Error::Domain(
                "seasonal orders require a seasonal period greater than 1".into(),
            ));
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.orders.period
    }

    /// `p + q + P + Q`.
    pub fn order_sum(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    /// Degree of the multiplied-out AR polynomial, `p + P*S`.
    pub fn ar_degree(&self) -> usize {
        self.p + self.seasonal_p * self.orders.period
    }

    /// Degree of the multiplied-out MA polynomial, `q + Q*S`.
    pub fn ma_degree(&self) -> usize {
        self.q + self.seasonal_q * self.orders.period
    }

    /// Minimum series length for likelihood evaluation.
    pub fn min_length(&self) -> usize {
        self.orders.lost() + self.ar_degree().max(self.ma_degree()) + 1
    }

    /// Estimated parameters excluding regression coefficients: ARMA
    /// coefficients, the intercept when present, and `sigma2`.
    pub fn base_parameter_count(&self) -> usize {
        self.order_sum() + usize::from(self.include_intercept) + 1
    }
}

impl fmt::Display for SarimaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SARIMA({},{},{})x({},{},{})[{}]",
            self.p,
            self.orders.d,
            self.q,
            self.seasonal_p,
            self.orders.seasonal_d,
            self.seasonal_q,
            self.orders.period
        )
    }
}

/// Coefficients of a SARIMA model.
///
/// Sign conventions: `phi(B) = 1 - phi_1 B - ...` and
/// `theta(B) = 1 + theta_1 B + ...`, likewise for the seasonal factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarimaParams {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_theta: Vec<f64>,
    /// Intercept of the differenced equation.
    pub delta: f64,
    pub sigma2: f64,
}

impl SarimaParams {
    /// All coefficients zero and unit innovation variance.
    pub fn zeros(spec: &SarimaSpec) -> Self {
        Self {
            phi: vec![0.0; spec.p],
            theta: vec![0.0; spec.q],
            seasonal_phi: vec![0.0; spec.seasonal_p],
            seasonal_theta: vec![0.0; spec.seasonal_q],
            delta: 0.0,
            sigma2: 1.0,
        }
    }

    pub fn check_dims(&self, spec: &SarimaSpec) -> Result<()> {
        let dims = [
            ("phi", self.phi.len(), spec.p),
            ("theta", self.theta.len(), spec.q),
            ("seasonal phi", self.seasonal_phi.len(), spec.seasonal_p),
            ("seasonal theta", self.seasonal_theta.len(), spec.seasonal_q),
        ];
        for (name, got, want) in dims {
            if got != want {
                return Err(Error::Arity(format!(
                    "{name} has {got} coefficients but {spec} needs {want}"
                )));
            }
        }
        if !spec.include_intercept && self.delta != 0.0 {
            return Err(Error::Arity(format!("{spec} has no intercept but delta = {}", self.delta)));
        }
        Ok(())
    }

    /// Dimensions, stationarity, invertibility and `sigma2 > 0`.
    pub fn validate(&self, spec: &SarimaSpec) -> Result<()> {
        spec.validate()?;
        self.check_dims(spec)?;
        let all = self
            .phi
            .iter()
            .chain(&self.theta)
            .chain(&self.seasonal_phi)
            .chain(&self.seasonal_theta)
            .chain([&self.delta, &self.sigma2]);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite coefficient".into()));
        }
        if !transform::is_stationary(&self.phi) {
            return Err(Error::Domain(format!("AR polynomial {:?} is not stationary", self.phi)));
        }
        if !transform::is_stationary(&self.seasonal_phi) {
            return Err(Error::Domain(format!(
                "seasonal AR polynomial {:?} is not stationary",
                self.seasonal_phi
            )));
        }
        if !transform::is_invertible(&self.theta) {
            return Err(Error::Domain(format!("MA polynomial {:?} is not invertible", self.theta)));
        }
        if !transform::is_invertible(&self.seasonal_theta) {
            return Err(Error::Domain(format!(
                "seasonal MA polynomial {:?} is not invertible",
                self.seasonal_theta
            )));
        }
        if self.sigma2 <= 0.0 {
            return Err(Error::Domain(format!("sigma2 = {} must be positive", self.sigma2)));
        }
        Ok(())
    }

    /// `phi(1) Phi(1)`, the factor linking `delta` to the process mean.
    pub fn ar_at_one(&self) -> f64 {
        (1.0 - self.phi.iter().sum::<f64>()) * (1.0 - self.seasonal_phi.iter().sum::<f64>())
    }

    /// Mean of the differenced process, `delta / (phi(1) Phi(1))`.
    pub fn mean(&self) -> f64 {
        self.delta / self.ar_at_one()
    }
}
