//! Maximum-likelihood estimation.

use serde::{Deserialize, Serialize};

use super::kalman::StateSpace;
use super::likelihood::{self, Prepared, Profile};
use super::optim::{self, OptimOptions};
use super::poly;
use super::transform;
use super::{SarimaParams, SarimaSpec};
use crate::error::{Error, Result};
use crate::exog::{DesignMatrix, ExogFit};
use crate::linalg;
use crate::selection;
use crate::series::{self, TimeSeries};

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Convergence on relative change of the log-likelihood.
    pub f_tol: f64,
    /// Convergence on the gradient norm of the per-observation log-likelihood.
    pub g_tol: f64,
    /// Relative step of the central-difference gradient.
    pub fd_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            f_tol: 1e-8,
            g_tol: 1e-5,
            fd_step: 1e-6,
        }
    }
}

/// A SARIMA model with estimated (or supplied) parameters and the data it
/// was conditioned on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: SarimaSpec,
    pub params: SarimaParams,
    /// Regression coefficients, one per design column.
    pub beta: Vec<f64>,
    pub beta_names: Vec<String>,
    pub loglik: f64,
    pub aicc: f64,
    /// Observations left after differencing.
    pub n_effective: usize,
    /// Standardized one-step-ahead innovations.
    pub residuals: TimeSeries,
    pub converged: bool,
    pub iterations: usize,
    /// Training series.
    pub series: TimeSeries,
    /// Training design, when the model has regressors.
    pub design: Option<DesignMatrix>,
    /// Weather-term structure behind `design`, for hybrid models.
    pub exog: Option<ExogFit>,
}

impl FittedModel {
    /// Number of estimated parameters counted by AICc.
    pub fn num_params(&self) -> usize {
        self.spec.base_parameter_count() + self.beta.len()
    }

    /// Mean of the differenced, regression-adjusted series.
    pub fn mean(&self) -> f64 {
        if self.spec.include_intercept {
            self.params.mean()
        } else {
            0.0
        }
    }

    pub fn with_exog(mut self, exog: ExogFit) -> Self {
        self.exog = Some(exog);
        self
    }

    /// Wraps fixed parameter values as a model conditioned on `series`,
    /// computing its likelihood and innovations without estimation.
    pub fn from_params(
        series: &TimeSeries,
        spec: &SarimaSpec,
        params: &SarimaParams,
        exog: Option<&DesignMatrix>,
        beta: Option<&[f64]>,
    ) -> Result<Self> {
        let loglik = likelihood::loglikelihood(series, spec, params, exog, beta)?;
        let beta = beta.unwrap_or(&[]).to_vec();
        let mut adjusted = series.values().to_vec();
        if let Some(design) = exog {
            for (x, m) in adjusted.iter_mut().zip(design.mul(&beta)) {
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
        let out = super::kalman::filter(&ss, &[&w])
            .ok_or_else(|| Error::Domain("innovation variance vanished during filtering".into()))?;
        let sd = params.sigma2.sqrt();
        let standardized = out.innovations[0]
            .iter()
            .zip(&out.variances)
            .map(|(v, f)| v / (f.sqrt() * sd))
            .collect();
        let n_effective = w.len();
        let k = spec.base_parameter_count() + beta.len();
        let aicc = selection::aicc(loglik, k, n_effective).unwrap_or(f64::INFINITY);
        Ok(Self {
            spec: *spec,
            params: params.clone(),
            beta_names: exog.map(|d| d.names().to_vec()).unwrap_or_default(),
            beta,
            loglik,
            aicc,
            n_effective,
            residuals: TimeSeries::new(standardized, series.start().offset(spec.orders.lost() as i64), series.period())?,
            converged: true,
            iterations: 0,
            series: series.clone(),
            design: exog.cloned(),
            exog: None,
        })
    }
}

/// Fits with default optimizer settings.
pub fn fit(series: &TimeSeries, spec: &SarimaSpec, exog: Option<&DesignMatrix>) -> Result<FittedModel> {
    fit_with(series, spec, exog, &FitOptions::default())
}

/// Unconstrained parameter layout: `[phi | Phi | theta | Theta]`.
struct Layout {
    p: usize,
    sp: usize,
    q: usize,
    sq: usize,
}

impl Layout {
    fn new(spec: &SarimaSpec) -> Self {
        Self {
            p: spec.p,
            sp: spec.seasonal_p,
            q: spec.q,
            sq: spec.seasonal_q,
        }
    }

    fn len(&self) -> usize {
        self.p + self.sp + self.q + self.sq
    }

    fn decode(&self, u: &[f64]) -> [Vec<f64>; 4] {
        let (a, rest) = u.split_at(self.p);
        let (b, rest) = rest.split_at(self.sp);
        let (c, d) = rest.split_at(self.q);
        [
            transform::ar_from_unconstrained(a),
            transform::ar_from_unconstrained(b),
            transform::ma_from_unconstrained(c),
            transform::ma_from_unconstrained(d),
        ]
    }

    fn encode(&self, coeffs: &[Vec<f64>; 4]) -> Option<Vec<f64>> {
        let mut u = transform::ar_to_unconstrained(&coeffs[0])?;
        u.extend(transform::ar_to_unconstrained(&coeffs[1])?);
        u.extend(transform::ma_to_unconstrained(&coeffs[2])?);
        u.extend(transform::ma_to_unconstrained(&coeffs[3])?);
        Some(u)
    }
}

fn evaluate(coeffs: &[Vec<f64>; 4], period: usize, data: &Prepared) -> Option<Profile> {
    let (ar, ma) = poly::expand_raw(&coeffs[0], &coeffs[2], &coeffs[1], &coeffs[3], period);
    let ss = StateSpace::new(&ar, &ma)?;
    likelihood::profile(&ss, data)
}

/// Maximizes the exact likelihood over the ARMA coefficients, with the
/// regression coefficients, intercept and innovation variance at their
/// closed-form conditional maximizers at every step.
pub fn fit_with(
    series: &TimeSeries,
    spec: &SarimaSpec,
    exog: Option<&DesignMatrix>,
    options: &FitOptions,
) -> Result<FittedModel> {
    let data = likelihood::prepare(series, spec, exog)?;
    let ncols = exog.map_or(0, DesignMatrix::ncols);
    let n = data.response.len();
    let k = spec.base_parameter_count() + ncols;
    if n <= k + 1 {
        return Err(Error::Oversaturated { k, n });
    }
    let layout = Layout::new(spec);
    let period = spec.period();
    let objective = |u: &[f64]| -> f64 {
        match evaluate(&layout.decode(u), period, &data) {
            Some(p) => -p.loglik / n as f64,
            None => f64::INFINITY,
        }
    };

    let zero = vec![0.0; layout.len()];
    let mut start = zero.clone();
    if layout.len() > 0 {
        if let Some(u) = layout.encode(&hannan_rissanen(&data, spec)) {
            if objective(&u) < objective(&zero) {
                start = u;
            }
        }
    }
    let opts = OptimOptions {
        max_iter: options.max_iter,
        f_tol: options.f_tol,
        g_tol: options.g_tol,
        step: options.fd_step,
    };
    let result = optim::minimize(objective, &start, &opts);
    debug_assert!(result.value.is_finite());
    let coeffs = layout.decode(&result.x);
    let profile = evaluate(&coeffs, period, &data)
        .ok_or_else(|| Error::Domain(format!("{spec}: likelihood not finite at the optimum")))?;

    let [phi, seasonal_phi, theta, seasonal_theta] = coeffs;
    let mut params = SarimaParams {
        phi,
        theta,
        seasonal_phi,
        seasonal_theta,
        delta: 0.0,
        sigma2: profile.sigma2,
    };
    if spec.include_intercept {
        params.delta = profile.coefficients[ncols] * params.ar_at_one();
    }
    let beta = profile.coefficients[..ncols].to_vec();
    let aicc = selection::aicc(profile.loglik, k, n)?;
    Ok(FittedModel {
        spec: *spec,
        params,
        beta,
        beta_names: data.names[..ncols].to_vec(),
        loglik: profile.loglik,
        aicc,
        n_effective: n,
        residuals: TimeSeries::new(
            profile.standardized,
            series.start().offset(spec.orders.lost() as i64),
            series.period(),
        )?,
        converged: result.converged,
        iterations: result.iterations,
        series: series.clone(),
        design: exog.cloned(),
        exog: None,
    })
}

/// Starting values from a long autoregression followed by a regression on
/// lagged values and lagged residual estimates. Seasonal and nonseasonal
/// lags enter additively.
fn hannan_rissanen(data: &Prepared, spec: &SarimaSpec) -> [Vec<f64>; 4] {
    let zeros = || {
        [
            vec![0.0; spec.p],
            vec![0.0; spec.seasonal_p],
            vec![0.0; spec.q],
            vec![0.0; spec.seasonal_q],
        ]
    };
    let y = match linalg::least_squares(&data.regressors, &data.response) {
        Some(ls) => ls.residuals,
        None => return zeros(),
    };
    let n = y.len();
    let s = spec.period();
    let max_lag = spec.ar_degree().max(spec.ma_degree());
    let has_ma = spec.q + spec.seasonal_q > 0;

    let mut resid = vec![0.0; n];
    let mut first = max_lag;
    if has_ma {
        let m = (max_lag + 2).max(10).min(n / 3);
        let Ok(rho) = series::acf_values(&y, m) else {
            return zeros();
        };
        let (_, long_ar) = series::durbin_levinson(&rho);
        for t in m..n {
            resid[t] = y[t] - long_ar.iter().enumerate().map(|(j, a)| a * y[t - 1 - j]).sum::<f64>();
        }
        first = first.max(m + spec.ma_degree());
    }
    let lags_y: Vec<usize> = (1..=spec.p).chain((1..=spec.seasonal_p).map(|j| j * s)).collect();
    let lags_e: Vec<usize> = (1..=spec.q).chain((1..=spec.seasonal_q).map(|j| j * s)).collect();
    let rows = n.saturating_sub(first);
    if rows < 2 * (lags_y.len() + lags_e.len()) + 5 {
        return zeros();
    }
    let mut columns: Vec<Vec<f64>> = lags_y
        .iter()
        .map(|&l| (first..n).map(|t| y[t - l]).collect())
        .collect();
    columns.extend(lags_e.iter().map(|&l| (first..n).map(|t| resid[t - l]).collect()));
    let target: Vec<f64> = y[first..].to_vec();
    let Some(ls) = linalg::least_squares(&columns, &target) else {
        return zeros();
    };
    let c = ls.coefficients;
    let (p, sp, q) = (spec.p, spec.seasonal_p, spec.q);
    let mut out = [
        c[..p].to_vec(),
        c[p..p + sp].to_vec(),
        c[p + sp..p + sp + q].to_vec(),
        c[p + sp + q..].to_vec(),
    ];
    for (i, group) in out.iter_mut().enumerate() {
        let valid = |g: &[f64]| {
            if i < 2 {
                transform::is_stationary(g)
            } else {
                transform::is_invertible(g)
            }
        };
        let mut tries = 0;
        while !valid(group) && tries < 30 {
            group.iter_mut().for_each(|v| *v *= 0.8);
            tries += 1;
        }
        if !valid(group) {
            group.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sarima::simulate;
    use crate::series::DifferencingOrders;

    #[test]
    fn recovers_ar1() {
        let spec = SarimaSpec::arima(1, 0, 0);
        let params = SarimaParams {
            phi: vec![0.6],
            ..SarimaParams::zeros(&spec)
        };
        let x = simulate(&spec, &params, 800, 11).unwrap();
        let m = fit(&x, &spec, None).unwrap();
        assert!(m.converged);
        assert!((m.params.phi[0] - 0.6).abs() < 0.1, "{:?}", m.params);
        assert!((m.params.sigma2 - 1.0).abs() < 0.15);
        assert_eq!(m.residuals.len(), m.n_effective);
    }

    #[test]
    fn profiled_equals_direct_likelihood() {
        let spec = SarimaSpec::arima(1, 0, 1);
        let params = SarimaParams {
            phi: vec![0.5],
            theta: vec![0.3],
            delta: 1.0,
            ..SarimaParams::zeros(&spec)
        };
        let x = simulate(&spec, &params, 300, 5).unwrap();
        let m = fit(&x, &spec, None).unwrap();
        let direct = likelihood::loglikelihood(&x, &spec, &m.params, None, None).unwrap();
        assert!((direct - m.loglik).abs() < 1e-8);
    }

    #[test]
    fn oversaturated_is_error() {
        let spec = SarimaSpec::arima(3, 0, 2);
        let x = TimeSeries::from_values((0..8).map(|t| (t as f64).cos()).collect()).unwrap();
        assert!(matches!(fit(&x, &spec, None), Err(Error::Oversaturated { .. })));
    }

    #[test]
    fn exactly_periodic_seasonal_walk() {
        let spec = SarimaSpec::with_orders(DifferencingOrders::new(0, 1, 4).unwrap(), 0, 0, 0, 0);
        let x = TimeSeries::from_values([1., 5., 2., 7.].repeat(6)).unwrap().with_period(4).unwrap();
        let m = fit(&x, &spec, None).unwrap();
        assert!(m.loglik.is_finite());
        assert!(m.params.sigma2 > 0.0);
    }
}
