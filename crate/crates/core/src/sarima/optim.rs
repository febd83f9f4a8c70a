//! BFGS minimization with central finite-difference gradients.

#[derive(Debug, Clone, Copy)]
pub(crate) struct OptimOptions {
    pub max_iter: usize,
    /// Stop when the relative change in the objective falls below this.
    pub f_tol: f64,
    /// Stop when the gradient norm falls below this.
    pub g_tol: f64,
    /// Relative finite-difference step.
    pub step: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest move allowed in any coordinate per line search.
const MAX_STEP: f64 = 2.0;

fn gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], fx: f64, step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = step * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            match (up.is_finite(), down.is_finite()) {
                (true, true) => (up - down) / (2.0 * h),
                (true, false) => (up - fx) / h,
                (false, true) => (fx - down) / h,
                (false, false) => 0.0,
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

pub(crate) fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &OptimOptions) -> OptimResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if n == 0 || !fx.is_finite() {
        return OptimResult {
            converged: n == 0 && fx.is_finite(),
            x,
            value: fx,
            iterations: 0,
        };
    }
    let mut g = gradient(&mut f, &x, fx, opts.step);
    let mut h = identity(n);
    let mut fresh = true;

    for iter in 1..=opts.max_iter {
        if norm(&g) < opts.g_tol {
            return OptimResult {
                x,
                value: fx,
                iterations: iter - 1,
                converged: true,
            };
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            h = identity(n);
            fresh = true;
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let biggest = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut alpha = if biggest > MAX_STEP { MAX_STEP / biggest } else { 1.0 };
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if fresh {
                // No decrease along steepest descent: the objective is flat
                // to working precision.
                return OptimResult {
                    x,
                    value: fx,
                    iterations: iter,
                    converged: true,
                };
            }
            h = identity(n);
            fresh = true;
            continue;
        };
        let g_new = gradient(&mut f, &x_new, f_new, opts.step);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if fresh {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v *= scale);
            }
            // H <- (I - rho s y') H (I - rho y s') + rho s s'
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            fresh = false;
        }
        let rel_change = (fx - f_new).abs() / fx.abs().max(1.0);
        x = x_new;
        fx = f_new;
        g = g_new;
        if rel_change < opts.f_tol {
            return OptimResult {
                x,
                value: fx,
                iterations: iter,
                converged: true,
            };
        }
    }
    OptimResult {
        x,
        value: fx,
        iterations: opts.max_iter,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OPTS: OptimOptions = OptimOptions {
        max_iter: 500,
        f_tol: 1e-12,
        g_tol: 1e-7,
        step: 1e-6,
    };

    #[test]
    fn quadratic_bowl() {
        let r = minimize(|x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2), &[0.0, 0.0], &OPTS);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] + 2.0).abs() < 1e-4);
    }

    #[test]
    fn rosenbrock() {
        let r = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &OPTS,
        );
        assert!((r.x[0] - 1.0).abs() < 1e-3, "{:?}", r);
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let opts = OptimOptions { max_iter: 2, ..OPTS };
        let r = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &opts,
        );
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
    }

    #[test]
    fn zero_dimensional() {
        let r = minimize(|_| 3.0, &[], &OPTS);
        assert!(r.converged);
        assert_eq!(r.value, 3.0);
    }
}
