//! Exact Kalman filter for a zero-mean ARMA process.
//!
//! State-space form with state dimension `r = max(p, q + 1)`:
//!
//! ```text
//! y_t       = a_{1,t}
//! a_{t+1}   = T a_t + R e_{t+1},   T = [phi | I; 0],  R = (1, theta_1, ..., theta_{r-1})'
//! ```
//!
//! Innovation variance is fixed at one; callers rescale. Because the first
//! state component is observed without noise, the covariance recursion only
//! involves the MA loading `R`, which keeps each step `O(r^2)` with a small
//! constant. The filter is linear in the data, so several series can share a
//! single covariance recursion (used to profile out regression coefficients).

use crate::linalg;

/// MA(infinity) weights of `phi(B) y = theta(B) e` with `ar`/`ma` in the
/// conventions of [`super::expand_polynomials`].
pub(crate) fn arma_psi(ar: &[f64], ma: &[f64], count: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(count);
    for j in 0..count {
        let mut v = if j == 0 {
            1.0
        } else {
            ma.get(j - 1).copied().unwrap_or(0.0)
        };
        for (i, a) in ar.iter().enumerate().take(j) {
            v += a * psi[j - 1 - i];
        }
        psi.push(v);
    }
    psi
}

/// Autocovariances `gamma(0..=max_lag)` of the ARMA process with unit
/// innovation variance. `None` when the AR system is singular.
pub(crate) fn arma_autocovariance(ar: &[f64], ma: &[f64], max_lag: usize) -> Option<Vec<f64>> {
    let p = ar.len();
    let q = ma.len();
    let psi = arma_psi(ar, ma, q + 1);
    let theta = |j: usize| if j == 0 { 1.0 } else { ma[j - 1] };
    // c_k = sum_{j=k}^{q} theta_j psi_{j-k}
    let rhs = |k: usize| -> f64 { (k..=q).map(|j| theta(j) * psi[j - k]).sum() };

    let mut gamma = vec![0.0; max_lag.max(p) + 1];
    if p == 0 {
        for (k, g) in gamma.iter_mut().enumerate() {
            *g = if k <= q { rhs(k) } else { 0.0 };
        }
    } else {
        let n = p + 1;
        let mut a = vec![0.0; n * n];
        let nonzero: Vec<(usize, f64)> = ar
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i + 1, *v))
            .collect();
        for k in 0..n {
            a[k * n + k] += 1.0;
            for &(j, phi) in &nonzero {
                a[k * n + k.abs_diff(j)] -= phi;
            }
        }
        let b: Vec<f64> = (0..n).map(rhs).collect();
        let solved = linalg::solve(a, b, n)?;
        gamma[..n].copy_from_slice(&solved);
        for k in n..gamma.len() {
            let mut g: f64 = nonzero.iter().map(|&(j, phi)| phi * gamma[k - j]).sum();
            if k <= q {
                g += rhs(k);
            }
            gamma[k] = g;
        }
    }
    gamma.truncate(max_lag + 1);
    Some(gamma)
}

/// ARMA model in state-space form with its stationary initial covariance.
#[derive(Debug, Clone)]
pub(crate) struct StateSpace {
    r: usize,
    /// First column of `T`, zero-padded to length `r`.
    phi: Vec<f64>,
    /// MA loading `R`, zero-padded to length `r`.
    loading: Vec<f64>,
    /// Stationary covariance of the state, row-major `r x r`.
    initial_cov: Vec<f64>,
}

impl StateSpace {
    pub(crate) fn new(ar: &[f64], ma: &[f64]) -> Option<Self> {
        let r = ar.len().max(ma.len() + 1);
        let mut phi = vec![0.0; r];
        phi[..ar.len()].copy_from_slice(ar);
        let mut loading = vec![0.0; r];
        loading[0] = 1.0;
        loading[1..=ma.len()].copy_from_slice(ma);

        let gamma = arma_autocovariance(ar, ma, r)?;
        let psi = arma_psi(ar, ma, r + 1);
        // First row: Cov(y_t, a_{k,t}).
        let mut first = vec![0.0; r];
        first[0] = gamma[0];
        for (k, slot) in first.iter_mut().enumerate().skip(1) {
            let mut s = 0.0;
            for m in 0..(r - k) {
                s += phi[k + m] * gamma[m + 1] + loading[k + m] * psi[m];
            }
            *slot = s;
        }
        // Remaining entries from P = T P T' + R R', filled bottom-right first.
        let mut cov = vec![0.0; r * r];
        let at = |cov: &[f64], i: usize, j: usize| if i < r && j < r { cov[i * r + j] } else { 0.0 };
        let first_at = |k: usize| if k < r { first[k] } else { 0.0 };
        for i in (1..r).rev() {
            for j in (i..r).rev() {
                let v = phi[i] * phi[j] * gamma[0]
                    + phi[i] * first_at(j + 1)
                    + phi[j] * first_at(i + 1)
                    + at(&cov, i + 1, j + 1)
                    + loading[i] * loading[j];
                cov[i * r + j] = v;
                cov[j * r + i] = v;
            }
        }
        for (k, v) in first.iter().enumerate() {
            cov[k] = *v;
            cov[k * r] = *v;
        }
        if !cov.iter().all(|v| v.is_finite()) {
            return None;
        }
        Some(Self {
            r,
            phi,
            loading,
            initial_cov: cov,
        })
    }

    #[cfg(test)]
    pub(crate) fn dim(&self) -> usize {
        self.r
    }

    /// Predicts `steps` further values from a one-step-ahead state.
    pub(crate) fn project(&self, state: &[f64], steps: usize) -> Vec<f64> {
        let mut a = state.to_vec();
        let mut out = Vec::with_capacity(steps);
        for _ in 0..steps {
            out.push(a[0]);
            a = self.transition(&a);
        }
        out
    }

    fn transition(&self, a: &[f64]) -> Vec<f64> {
        let r = self.r;
        (0..r)
            .map(|i| self.phi[i] * a[0] + if i + 1 < r { a[i + 1] } else { 0.0 })
            .collect()
    }

    #[cfg(test)]
    pub(crate) fn initial_cov(&self) -> &[f64] {
        &self.initial_cov
    }
}

/// Innovations of every filtered column plus their shared variances.
#[derive(Debug, Clone)]
pub(crate) struct FilterOutput {
    pub innovations: Vec<Vec<f64>>,
    /// Innovation variances in units of the innovation variance.
    pub variances: Vec<f64>,
    /// One-step-ahead predicted state after the last observation, per column.
    pub next_state: Vec<Vec<f64>>,
}

impl FilterOutput {
    pub(crate) fn log_det(&self) -> f64 {
        self.variances.iter().map(|f| f.ln()).sum()
    }
}

/// Runs the filter over equally long columns. Returns `None` if an innovation
/// variance stops being positive.
pub(crate) fn filter(ss: &StateSpace, columns: &[&[f64]]) -> Option<FilterOutput> {
    let r = ss.r;
    let n = columns.first().map_or(0, |c| c.len());
    let mut states: Vec<Vec<f64>> = vec![vec![0.0; r]; columns.len()];
    let mut next = vec![0.0; r];
    let mut cov = ss.initial_cov.clone();
    let mut scratch = vec![0.0; r * r];
    let mut innovations: Vec<Vec<f64>> = columns.iter().map(|_| Vec::with_capacity(n)).collect();
    let mut variances = Vec::with_capacity(n);
    let mut frozen = false;

    for t in 0..n {
        let f = cov[0];
        if !(f > 0.0) || !f.is_finite() {
            return None;
        }
        variances.push(f);
        for (c, col) in columns.iter().enumerate() {
            let a = &mut states[c];
            let v = col[t] - a[0];
            innovations[c].push(v);
            let scale = v / f;
            // Filtered state, then one-step prediction. The filtered first
            // component equals the observation.
            let a0 = col[t];
            for i in 0..r {
                let upper = if i + 1 < r { a[i + 1] + cov[i + 1] * scale } else { 0.0 };
                next[i] = ss.phi[i] * a0 + upper;
            }
            a.copy_from_slice(&next);
        }
        if frozen {
            continue;
        }
        let mut change: f64 = 0.0;
        let mut magnitude: f64 = 0.0;
        for i in 0..r {
            let gi = if i + 1 < r { cov[i + 1] } else { 0.0 };
            for j in i..r {
                let gj = if j + 1 < r { cov[j + 1] } else { 0.0 };
                let lower = if i + 1 < r && j + 1 < r {
                    cov[(i + 1) * r + j + 1]
                } else {
                    0.0
                };
                let v = lower - gi * gj / f + ss.loading[i] * ss.loading[j];
                change = change.max((v - cov[i * r + j]).abs());
                magnitude = magnitude.max(v.abs());
                scratch[i * r + j] = v;
                scratch[j * r + i] = v;
            }
        }
        std::mem::swap(&mut cov, &mut scratch);
        if change <= 1e-13 * magnitude.max(1.0) {
            frozen = true;
        }
    }
    Some(FilterOutput {
        innovations,
        variances,
        next_state: states,
    })
}
