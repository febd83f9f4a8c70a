//! AICc and exhaustive model search.
//!
//! The search runs in two stages: SARIMA orders with no regressors, then the
//! 27 weather-term combinations on the chosen orders. Non-converged or failed
//! fits stay in the report but never win.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exog::{self, ExogFit, ExogSpec, Weather};
use crate::sarima::{self, FitOptions, FittedModel, SarimaSpec};
use crate::series::{DifferencingOrders, TimeSeries};

/// Candidates whose AICc lies within this distance of the minimum are ties.
pub const TIE_TOLERANCE: f64 = 1e-6;

/// Corrected Akaike information criterion.
///
/// `k` counts every estimated parameter, `sigma2` and the intercept
/// included.
///
/// ```
/// let v = peakload::aicc(-100.0, 3, 50).unwrap();
/// assert!((v - (206.0 + 24.0 / 46.0)).abs() < 1e-12);
/// ```
pub fn aicc(loglik: f64, k: usize, n: usize) -> Result<f64> {
    if n <= k + 1 {
        return Err(Error::Oversaturated { k, n });
    }
    let kf = k as f64;
    Ok(-2.0 * loglik + 2.0 * kf + 2.0 * kf * (kf + 1.0) / (n - k - 1) as f64)
}

/// Every `(p, q, P, Q)` with `p + q + P + Q <= max_sum` on top of fixed
/// differencing, ordered by order sum and then lexicographically.
///
/// For a non-seasonal period only `(p, q)` are enumerated.
pub fn enumerate_orders(max_sum: usize, orders: DifferencingOrders) -> Vec<SarimaSpec> {
    let seasonal = orders.period > 1;
    let mut specs = Vec::new();
    for total in 0..=max_sum {
        for p in 0..=total {
            for q in 0..=total - p {
                let rest = total - p - q;
                if !seasonal {
                    if rest == 0 {
                        specs.push(SarimaSpec::with_orders(orders, p, q, 0, 0));
                    }
                    continue;
                }
                for sp in 0..=rest {
                    specs.push(SarimaSpec::with_orders(orders, p, q, sp, rest - sp));
                }
            }
        }
    }
    specs
}

/// One fitted (or failed) candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub spec: SarimaSpec,
    pub exog: ExogSpec,
    /// Parameter count used by AICc.
    pub k: usize,
    pub loglik: Option<f64>,
    pub aicc: Option<f64>,
    pub converged: bool,
    /// Failure message when the fit did not produce a model.
    pub error: Option<String>,
}

impl Candidate {
    fn eligible(&self) -> Option<f64> {
        if self.converged {
            self.aicc.filter(|v| v.is_finite())
        } else {
            None
        }
    }
}

/// Every candidate in enumeration order plus the winner and its ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub candidates: Vec<Candidate>,
    pub best: usize,
    pub ties: Vec<usize>,
}

impl SearchReport {
    pub fn winner(&self) -> &Candidate {
        &self.candidates[self.best]
    }

    /// Candidate indices, eligible ones by increasing AICc, then the rest in
    /// enumeration order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut eligible: Vec<usize> = (0..self.candidates.len())
            .filter(|&i| self.candidates[i].eligible().is_some())
            .collect();
        eligible.sort_by(|&a, &b| {
            let (x, y) = (self.candidates[a].eligible().unwrap(), self.candidates[b].eligible().unwrap());
            x.total_cmp(&y).then(a.cmp(&b))
        });
        let rest = (0..self.candidates.len()).filter(|&i| self.candidates[i].eligible().is_none());
        eligible.into_iter().chain(rest).collect()
    }

    /// Ranked table: orders, exogenous terms, k, log-likelihood, AICc and
    /// convergence.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>4}  {:<24} {:<36} {:>3} {:>14} {:>14}  converged",
            "rank", "model", "exogenous", "k", "loglik", "AICc"
        );
        for (rank, i) in self.ranking().into_iter().enumerate() {
            let c = &self.candidates[i];
            let num = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
            let status = match (&c.error, c.converged) {
                (Some(e), _) => format!("failed: {e}"),
                (None, true) => "yes".into(),
                (None, false) => "no".into(),
            };
            let mark = if i == self.best { "*" } else { " " };
            let _ = writeln!(
                out,
                "{:>3}{mark}  {:<24} {:<36} {:>3} {:>14} {:>14}  {status}",
                rank + 1,
                c.spec.to_string(),
                c.exog.formula(),
                c.k,
                num(c.loglik),
                num(c.aicc),
            );
        }
        out
    }

    /// Full-precision CSV twin of [`SearchReport::to_table`] in enumeration
    /// order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,p,d,q,P,D,Q,S,intercept,exog,k,loglik,aicc,converged,best,tie,error\n");
        for (i, c) in self.candidates.iter().enumerate() {
            let num = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:?}"));
            let s = &c.spec;
            let _ = writeln!(
                out,
                "{i},{},{},{},{},{},{},{},{},\"{}\",{},{},{},{},{},{},\"{}\"",
                s.p,
                s.orders.d,
                s.q,
                s.seasonal_p,
                s.orders.seasonal_d,
                s.seasonal_q,
                s.orders.period,
                s.include_intercept,
                c.exog,
                c.k,
                num(c.loglik),
                num(c.aicc),
                c.converged,
                i == self.best,
                self.ties.contains(&i),
                c.error.as_deref().unwrap_or("").replace('"', "'"),
            );
        }
        out
    }
}

fn failure_summary(candidates: &[Candidate]) -> String {
    let mut out = String::new();
    for c in candidates {
        let reason = c.error.clone().unwrap_or_else(|| "optimizer did not converge".into());
        let _ = writeln!(out, "  {} [{}]: {reason}", c.spec, c.exog);
    }
    out
}

/// Picks the winner: minimal AICc, ties within [`TIE_TOLERANCE`] resolved by
/// `tie_key`.
fn choose<K: Ord>(candidates: &[Candidate], tie_key: impl Fn(usize) -> K) -> Result<(usize, Vec<usize>)> {
    let min = candidates
        .iter()
        .filter_map(Candidate::eligible)
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::SelectionFailed {
            diagnostics: failure_summary(candidates),
        });
    }
    let ties: Vec<usize> = (0..candidates.len())
        .filter(|&i| candidates[i].eligible().is_some_and(|v| v <= min + TIE_TOLERANCE))
        .collect();
    let best = *ties.iter().min_by_key(|&&i| tie_key(i)).unwrap();
    Ok((best, ties))
}

fn run(
    series: &TimeSeries,
    spec: &SarimaSpec,
    exog_spec: ExogSpec,
    design: Option<&exog::DesignMatrix>,
    options: &FitOptions,
) -> (Candidate, Option<FittedModel>) {
    let k = spec.base_parameter_count() + design.map_or(0, |d| d.ncols());
    match sarima::fit_with(series, spec, design, options) {
        Ok(model) => (
            Candidate {
                spec: *spec,
                exog: exog_spec,
                k,
                loglik: Some(model.loglik),
                aicc: Some(model.aicc),
                converged: model.converged,
                error: None,
            },
            Some(model),
        ),
        Err(e) => (
            Candidate {
                spec: *spec,
                exog: exog_spec,
                k,
                loglik: None,
                aicc: None,
                converged: false,
                error: Some(e.to_string()),
            },
            None,
        ),
    }
}

/// Fits every order with `p + q + P + Q <= max_sum` and returns the
/// AICc-minimal converged model. Ties go to the smaller order sum, then to
/// the lexicographically smaller `(p, q, P, Q)`.
pub fn select_sarima(
    series: &TimeSeries,
    orders: DifferencingOrders,
    max_sum: usize,
) -> Result<(FittedModel, SearchReport)> {
    select_sarima_with(series, orders, max_sum, &FitOptions::default())
}

pub fn select_sarima_with(
    series: &TimeSeries,
    orders: DifferencingOrders,
    max_sum: usize,
    options: &FitOptions,
) -> Result<(FittedModel, SearchReport)> {
    orders.validate()?;
    let specs = enumerate_orders(max_sum, orders);
    let mut candidates = Vec::with_capacity(specs.len());
    let mut models = Vec::with_capacity(specs.len());
    for spec in &specs {
        let (c, m) = run(series, spec, ExogSpec::none(), None, options);
        candidates.push(c);
        models.push(m);
    }
    let (best, ties) = choose(&candidates, |i| {
        let s = &specs[i];
        (s.order_sum(), s.p, s.q, s.seasonal_p, s.seasonal_q)
    })?;
    let model = models[best].take().expect("eligible candidate has a model");
    Ok((model, SearchReport { candidates, best, ties }))
}

/// Fits `spec` under each of the 27 weather-term combinations, centering on
/// the means of `weather`, and returns the AICc-minimal model. Ties go to
/// fewer regression columns.
pub fn select_exog(series: &TimeSeries, spec: &SarimaSpec, weather: &Weather) -> Result<(FittedModel, SearchReport)> {
    select_exog_with(series, spec, weather, &FitOptions::default())
}

pub fn select_exog_with(
    series: &TimeSeries,
    spec: &SarimaSpec,
    weather: &Weather,
    options: &FitOptions,
) -> Result<(FittedModel, SearchReport)> {
    select_joint_with(series, &[*spec], weather, options)
}

/// Searches orders and weather terms together over all
/// `enumerate_orders(max_sum) x 27` pairs.
pub fn select_joint(
    series: &TimeSeries,
    orders: DifferencingOrders,
    max_sum: usize,
    weather: &Weather,
) -> Result<(FittedModel, SearchReport)> {
    select_joint_with(series, &enumerate_orders(max_sum, orders), weather, &FitOptions::default())
}

fn select_joint_with(
    series: &TimeSeries,
    specs: &[SarimaSpec],
    weather: &Weather,
    options: &FitOptions,
) -> Result<(FittedModel, SearchReport)> {
    if weather.start() != series.start() || weather.len() != series.len() {
        return Err(Error::Alignment(format!(
            "weather spans {}..{} but demand spans {}..{}",
            weather.start(),
            weather.max.end(),
            series.start(),
            series.end()
        )));
    }
    let centering = weather.centering();
    let exog_specs = exog::enumerate_specs();
    let mut candidates = Vec::new();
    let mut models = Vec::new();
    let mut keys = Vec::new();
    for spec in specs {
        for es in &exog_specs {
            let (c, m) = if es.is_none() {
                run(series, spec, *es, None, options)
            } else {
                match weather.design(es, &centering) {
                    Ok(design) => run(series, spec, *es, Some(&design), options),
                    Err(e) => (
                        Candidate {
                            spec: *spec,
                            exog: *es,
                            k: spec.base_parameter_count() + es.columns(),
                            loglik: None,
                            aicc: None,
                            converged: false,
                            error: Some(e.to_string()),
                        },
                        None,
                    ),
                }
            };
            keys.push((
                spec.order_sum() + es.columns(),
                es.columns(),
                candidates.len(),
            ));
            candidates.push(c);
            models.push(m.map(|m| m.with_exog(ExogFit { spec: *es, centering })));
        }
    }
    let (best, ties) = choose(&candidates, |i| keys[i])?;
    let model = models[best].take().expect("eligible candidate has a model");
    Ok((model, SearchReport { candidates, best, ties }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn aicc_values() {
        assert!((aicc(-100.0, 3, 50).unwrap() - 206.521_739_130_434_8).abs() < 1e-9);
        assert!(matches!(aicc(0.0, 3, 4), Err(Error::Oversaturated { k: 3, n: 4 })));
        let mut last = f64::INFINITY;
        for n in 10..100 {
            let v = aicc(-10.0, 4, n).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn order_counts() {
        let orders = DifferencingOrders::new(0, 1, 4).unwrap();
        for s in 0..=6 {
            let specs = enumerate_orders(s, orders);
            assert_eq!(specs.len(), binomial(s + 4, 4));
            let mut brute = 0;
            for p in 0..=s {
                for q in 0..=s {
                    for sp in 0..=s {
                        for sq in 0..=s {
                            brute += usize::from(p + q + sp + sq <= s);
                        }
                    }
                }
            }
            assert_eq!(specs.len(), brute);
        }
        assert_eq!(enumerate_orders(0, orders)[0].order_sum(), 0);
        assert_eq!(enumerate_orders(5, orders).len(), 126);
    }

    #[test]
    fn nonseasonal_enumeration() {
        let specs = enumerate_orders(2, DifferencingOrders::none());
        assert_eq!(specs.len(), 6);
        assert!(specs.iter().all(|s| s.seasonal_p + s.seasonal_q == 0));
    }

    fn candidate(p: usize, aicc: Option<f64>, converged: bool) -> Candidate {
        Candidate {
            spec: SarimaSpec::arima(p, 0, 0),
            exog: ExogSpec::none(),
            k: p + 2,
            loglik: aicc.map(|a| -a / 2.0),
            aicc,
            converged,
            error: None,
        }
    }

    #[test]
    fn nonconverged_never_wins() {
        let cands = vec![candidate(0, Some(10.0), true), candidate(1, Some(1.0), false)];
        let (best, ties) = choose(&cands, |i| i).unwrap();
        assert_eq!((best, ties), (0, vec![0]));
    }

    #[test]
    fn ties_broken_by_key() {
        let cands = vec![
            candidate(2, Some(5.0), true),
            candidate(1, Some(5.0 + 1e-7), true),
            candidate(0, Some(6.0), true),
        ];
        let (best, ties) = choose(&cands, |i| cands[i].spec.p).unwrap();
        assert_eq!(best, 1);
        assert_eq!(ties, vec![0, 1]);
    }

    #[test]
    fn all_failed() {
        let cands = vec![candidate(0, None, false)];
        assert!(matches!(choose(&cands, |i| i), Err(Error::SelectionFailed { .. })));
    }
}
