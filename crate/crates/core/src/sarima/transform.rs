//! Partial-autocorrelation reparameterization of AR and MA polynomials.
//!
//! Any vector of partial autocorrelations in `(-1, 1)` maps through the
//! Durbin-Levinson step-up recursion to a stationary AR polynomial, and every
//! stationary polynomial arises this way exactly once. Composing with `tanh`
//! gives a bijection from `R^p` onto the stationary region.

/// Step-up recursion: partial autocorrelations to coefficients of
/// `1 - c_1 z - ... - c_p z^p`.
pub(crate) fn partials_to_coefficients(partials: &[f64]) -> Vec<f64> {
    let mut coeffs: Vec<f64> = Vec::with_capacity(partials.len());
    for &kappa in partials {
        let prev = coeffs.clone();
        for j in 0..prev.len() {
            coeffs[j] = prev[j] - kappa * prev[prev.len() - 1 - j];
        }
        coeffs.push(kappa);
    }
    coeffs
}

/// Step-down recursion; `None` when the polynomial is not stationary.
pub(crate) fn coefficients_to_partials(coeffs: &[f64]) -> Option<Vec<f64>> {
    let mut current = coeffs.to_vec();
    let mut partials = vec![0.0; coeffs.len()];
    for k in (0..coeffs.len()).rev() {
        let kappa = current[k];
        if !kappa.is_finite() || kappa.abs() >= 1.0 {
            return None;
        }
        partials[k] = kappa;
        let denom = 1.0 - kappa * kappa;
        let prev: Vec<f64> = (0..k)
            .map(|j| (current[j] + kappa * current[k - 1 - j]) / denom)
            .collect();
        current = prev;
    }
    Some(partials)
}

/// All roots of `1 - c_1 z - ... - c_p z^p` lie outside the unit circle.
pub fn is_stationary(coeffs: &[f64]) -> bool {
    coefficients_to_partials(coeffs).is_some()
}

/// All roots of `1 + c_1 z + ... + c_q z^q` lie outside the unit circle.
pub fn is_invertible(coeffs: &[f64]) -> bool {
    let negated: Vec<f64> = coeffs.iter().map(|c| -c).collect();
    is_stationary(&negated)
}

const PARTIAL_LIMIT: f64 = 1.0 - 1e-9;

/// Unconstrained values to stationary AR coefficients.
pub(crate) fn ar_from_unconstrained(u: &[f64]) -> Vec<f64> {
    let partials: Vec<f64> = u.iter().map(|x| x.tanh().clamp(-PARTIAL_LIMIT, PARTIAL_LIMIT)).collect();
    partials_to_coefficients(&partials)
}

/// Unconstrained values to invertible MA coefficients.
pub(crate) fn ma_from_unconstrained(u: &[f64]) -> Vec<f64> {
    ar_from_unconstrained(u).into_iter().map(|c| -c).collect()
}

pub(crate) fn ar_to_unconstrained(coeffs: &[f64]) -> Option<Vec<f64>> {
    coefficients_to_partials(coeffs).map(|p| p.into_iter().map(f64::atanh).collect())
}

pub(crate) fn ma_to_unconstrained(coeffs: &[f64]) -> Option<Vec<f64>> {
    let negated: Vec<f64> = coeffs.iter().map(|c| -c).collect();
    ar_to_unconstrained(&negated)
}
