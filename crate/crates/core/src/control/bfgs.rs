use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Central-difference step per coordinate.
    pub fd_step: f64,
    pub gtol: f64,
    /// Stop once an iteration improves `f` by less than this (relative).
    pub ftol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { max_iter: 200, fd_step: 1e-4, gtol: 1e-7, ftol: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Best value after each accepted iteration, starting with `f(x0)`.
    pub history: Vec<f64>,
}

/// Central-difference gradient; the `2n` evaluations run in parallel.
pub fn gradient(f: &(dyn Fn(&[f64]) -> f64 + Sync), x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
        .collect()
}

/// Quasi-Newton minimization with an inverse-Hessian BFGS update and a
/// backtracking Armijo line search. The best value never increases.
pub fn minimize(f: &(dyn Fn(&[f64]) -> f64 + Sync), x0: &[f64], opts: &BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = f(x0);
    let mut evals = 1;
    let mut history = vec![fx];
    if n == 0 {
        return Minimum { x: vec![], value: fx, iterations: 0, evaluations: evals, history };
    }
    let mut g = DVector::from_vec(gradient(f, x.as_slice(), opts.fd_step));
    evals += 2 * n;
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut iterations = 0;
    while iterations < opts.max_iter && g.norm() > opts.gtol {
        iterations += 1;
        let mut dir = -(&hinv * &g);
        if dir.dot(&g) >= 0.0 {
            hinv = DMatrix::identity(n, n);
            dir = -g.clone();
        }
        let slope = dir.dot(&g);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = &x + alpha * &dir;
            let ft = f(trial.as_slice());
            evals += 1;
            if ft.is_finite() && ft <= fx + 1e-4 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            // No descent along the quasi-Newton direction; retry once
            // from steepest descent before giving up.
            if hinv != DMatrix::identity(n, n) {
                hinv = DMatrix::identity(n, n);
                continue;
            }
            break;
        };
        let gn = DVector::from_vec(gradient(f, xn.as_slice(), opts.fd_step));
        evals += 2 * n;
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if iterations == 1 {
                hinv *= sy / y.dot(&y);
            }
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            hinv += (rho * rho * yhy + rho) * (&s * s.transpose()) - rho * (&hy * s.transpose() + &s * hy.transpose());
        }
        let improvement = fx - fnew;
        x = xn;
        g = gn;
        fx = fnew;
        history.push(fx);
        if improvement <= opts.ftol * fx.abs().max(1e-12) {
            break;
        }
    }
    Minimum { x: x.as_slice().to_vec(), value: fx, iterations, evaluations: evals, history }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_minimum() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(&f, &[-1.2, 1.0], &BfgsOptions { fd_step: 1e-6, ftol: 0.0, gtol: 1e-8, ..Default::default() });
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
        assert!(m.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn barrier_values_are_avoided() {
        // Infeasible half-plane returns a large finite value.
        let f = |x: &[f64]| if x[0] < 0.2 { 1e3 } else { (x[0] - 0.5).powi(2) + x[1] * x[1] };
        let m = minimize(&f, &[0.9, 0.3], &BfgsOptions::default());
        assert!(m.value < 1e-8, "{}", m.value);
    }
}
