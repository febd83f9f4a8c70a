//! Lag polynomials and the seasonal-by-nonseasonal expansion.

use super::{SarimaParams, SarimaSpec};
use crate::error::Result;

/// Product of two polynomials given constant term first.
pub fn polynomial_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Horner evaluation of a polynomial given constant term first.
pub fn evaluate_polynomial(coeffs: &[f64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
}

/// `1 + sign * (c_1 B^lag + c_2 B^(2 lag) + ...)`.
pub(crate) fn lag_polynomial(coeffs: &[f64], lag: usize, sign: f64) -> Vec<f64> {
    let mut poly = vec![0.0; coeffs.len() * lag + 1];
    poly[0] = 1.0;
    for (i, c) in coeffs.iter().enumerate() {
        poly[(i + 1) * lag] = sign * c;
    }
    poly
}

/// Full AR polynomial `phi(B) Phi(B^S)` in polynomial form.
pub(crate) fn ar_polynomial(phi: &[f64], seasonal_phi: &[f64], period: usize) -> Vec<f64> {
    polynomial_product(&lag_polynomial(phi, 1, -1.0), &lag_polynomial(seasonal_phi, period, -1.0))
}

/// Full MA polynomial `theta(B) Theta(B^S)` in polynomial form.
pub(crate) fn ma_polynomial(theta: &[f64], seasonal_theta: &[f64], period: usize) -> Vec<f64> {
    polynomial_product(&lag_polynomial(theta, 1, 1.0), &lag_polynomial(seasonal_theta, period, 1.0))
}

/// Multiplies out the seasonal and nonseasonal factors.
///
/// Returns `(ar, ma)` such that the AR operator is `1 - sum ar_j B^j`
/// (length `p + P*S`) and the MA operator is `1 + sum ma_j B^j`
/// (length `q + Q*S`).
pub fn expand_polynomials(spec: &SarimaSpec, params: &SarimaParams) -> Result<(Vec<f64>, Vec<f64>)> {
    params.check_dims(spec)?;
    Ok(expand_raw(
        &params.phi,
        &params.theta,
        &params.seasonal_phi,
        &params.seasonal_theta,
        spec.period(),
    ))
}

pub(crate) fn expand_raw(
    phi: &[f64],
    theta: &[f64],
    seasonal_phi: &[f64],
    seasonal_theta: &[f64],
    period: usize,
) -> (Vec<f64>, Vec<f64>) {
    let ar = ar_polynomial(phi, seasonal_phi, period);
    let ma = ma_polynomial(theta, seasonal_theta, period);
    let ar = ar[1..].iter().map(|c| -c).collect();
    let ma = ma[1..].to_vec();
    (ar, ma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::DifferencingOrders;

    #[test]
    fn seasonal_ar_expansion() {
        let spec = SarimaSpec::arima(1, 0, 0).seasonal(1, 0, 0, 4);
        let params = SarimaParams {
            phi: vec![0.5],
            seasonal_phi: vec![0.3],
            ..SarimaParams::zeros(&spec)
        };
        let (ar, ma) = expand_polynomials(&spec, &params).unwrap();
        let expected = [0.5, 0.0, 0.0, 0.3, -0.15];
        assert_eq!(ar.len(), 5);
        for (a, e) in ar.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
        assert!(ma.is_empty());
    }

    #[test]
    fn dimension_mismatch() {
        let spec = SarimaSpec::with_orders(DifferencingOrders::none(), 2, 0, 0, 0);
        let params = SarimaParams {
            phi: vec![0.1],
            ..SarimaParams::zeros(&spec)
        };
        assert!(expand_polynomials(&spec, &params).is_err());
    }

    #[test]
    fn horner() {
        assert_eq!(evaluate_polynomial(&[1.0, 2.0, 3.0], 2.0), 17.0);
        assert_eq!(polynomial_product(&[1.0, -1.0], &[1.0, 1.0]), vec![1.0, 0.0, -1.0]);
    }
}
