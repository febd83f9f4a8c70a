use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::poly;
use super::{SarimaParams, SarimaSpec};
use crate::error::{Error, Result};
use crate::series::{self, IsoWeek, TimeSeries};

/// Draws `n` observations of the SARIMA process from a seeded generator.
///
/// The ARMA recursion starts from zeros and runs through a burn-in of ten
/// times the combined lag span before values are kept; integration starts
/// from zero. The same seed always yields the same series.
pub fn simulate(spec: &SarimaSpec, params: &SarimaParams, n: usize, seed: u64) -> Result<TimeSeries> {
    params.validate(spec)?;
    if n == 0 {
        return Err(Error::Domain("cannot simulate an empty series".into()));
    }
    let (ar, ma) = poly::expand_polynomials(spec, params)?;
    let s = spec.period();
    let span = spec.p + spec.q + (spec.seasonal_p + spec.seasonal_q) * s + if s > 1 { s } else { 0 };
    let burn = 10 * span.max(1);
    let total = burn + n;
    let noise = Normal::new(0.0, params.sigma2.sqrt()).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shocks: Vec<f64> = (0..total).map(|_| noise.sample(&mut rng)).collect();
    let mut u = vec![0.0; total];
    for t in 0..total {
        let mut v = params.delta + shocks[t];
        for (j, a) in ar.iter().enumerate().take(t) {
            v += a * u[t - 1 - j];
        }
        for (j, m) in ma.iter().enumerate().take(t) {
            v += m * shocks[t - 1 - j];
        }
        u[t] = v;
    }
    let lost = spec.orders.lost();
    let level = series::integrate_values(&u, &spec.orders, &vec![0.0; lost])?;
    TimeSeries::new(level[level.len() - n..].to_vec(), IsoWeek::default(), s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let spec = SarimaSpec::arima(1, 0, 1).seasonal(1, 1, 0, 4);
        let params = SarimaParams {
            phi: vec![0.4],
            theta: vec![0.2],
            seasonal_phi: vec![-0.3],
            ..SarimaParams::zeros(&spec)
        };
        let a = simulate(&spec, &params, 50, 7).unwrap();
        let b = simulate(&spec, &params, 50, 7).unwrap();
        let c = simulate(&spec, &params, 50, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 50);
        assert_eq!(a.period(), 4);
    }

    #[test]
    fn rejects_invalid() {
        let spec = SarimaSpec::arima(1, 0, 0);
        let params = SarimaParams {
            phi: vec![1.0],
            ..SarimaParams::zeros(&spec)
        };
        assert!(simulate(&spec, &params, 10, 0).is_err());
    }
}
