//! Limited-memory BFGS with projected Armijo backtracking.

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop once the max-norm of the gradient falls below this.
    pub tol_grad: f64,
    /// Stop after this many consecutive iterations with relative decrease below `1e-15`.
    pub stall_iters: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions { memory: 12, max_iter: 5000, tol_grad: 1e-8, stall_iters: 25 }
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsReport {
    pub iterations: usize,
    pub value: f64,
    pub grad_inf: f64,
    pub converged: bool,
    /// Objective after each accepted step, starting with the initial value.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimizes `f` starting from `x`. `f` writes the gradient into its second
/// argument and returns the value. `project` maps a trial point back onto the
/// feasible set; the line search accepts only points where the projected
/// value decreases, so the history is non-increasing.
pub fn minimize(
    f: &mut dyn FnMut(&[f64], &mut [f64]) -> f64,
    x: &mut [f64],
    project: &dyn Fn(&mut [f64]),
    opts: LbfgsOptions,
) -> LbfgsReport {
    let n = x.len();
    project(x);
    let mut g = vec![0.0; n];
    let mut fx = f(x, &mut g);
    let mut history = vec![fx];
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut d = vec![0.0; n];
    let mut xt = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let mut alpha_buf = vec![0.0; opts.memory];
    let mut stall = 0;
    let mut first = true;
    for it in 0..opts.max_iter {
        let gi = inf_norm(&g);
        if gi <= opts.tol_grad {
            return LbfgsReport { iterations: it, value: fx, grad_inf: gi, converged: true, history };
        }
        // two-loop recursion
        d.copy_from_slice(&g);
        for (k, (s, y, rho)) in mem.iter().enumerate().rev() {
            let a = rho * dot(s, &d);
            alpha_buf[k] = a;
            for i in 0..n {
                d[i] -= a * y[i];
            }
        }
        let scale = match mem.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / gi.max(1e-300) * 1e-2,
        };
        for v in d.iter_mut() {
            *v *= scale;
        }
        for (k, (s, y, rho)) in mem.iter().enumerate() {
            let b = rho * dot(y, &d);
            for i in 0..n {
                d[i] += s[i] * (alpha_buf[k] - b);
            }
        }
        for v in d.iter_mut() {
            *v = -*v;
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            mem.clear();
            for i in 0..n {
                d[i] = -g[i] * 1e-2 / gi;
            }
            slope = dot(&g, &d);
        }
        let mut step = 1.0;
        let mut accepted = false;
        let mut f_new = fx;
        for _ in 0..60 {
            for i in 0..n {
                xt[i] = x[i] + step * d[i];
            }
            project(&mut xt);
            let ft = f(&xt, &mut gt);
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = true;
                f_new = ft;
                break;
            }
            step *= if first { 0.1 } else { 0.5 };
        }
        first = false;
        if !accepted {
            if mem.is_empty() {
                return LbfgsReport { iterations: it, value: fx, grad_inf: gi, converged: false, history };
            }
            mem.clear();
            continue;
        }
        let s: Vec<f64> = xt.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(g.iter()).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if mem.len() == opts.memory {
                mem.pop_front();
            }
            mem.push_back((s, y, 1.0 / sy));
        }
        let prev = fx;
        x.copy_from_slice(&xt);
        g.copy_from_slice(&gt);
        fx = f_new;
        history.push(fx);
        if prev - fx <= 1e-15 * fx.abs().max(1e-300) {
            stall += 1;
            if stall >= opts.stall_iters {
                return LbfgsReport { iterations: it + 1, value: fx, grad_inf: inf_norm(&g), converged: false, history };
            }
        } else {
            stall = 0;
        }
    }
    let gi = inf_norm(&g);
    LbfgsReport { iterations: opts.max_iter, value: fx, grad_inf: gi, converged: gi <= opts.tol_grad, history }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rosenbrock() {
        let mut f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let mut x = vec![-1.2, 1.0];
        let r = minimize(&mut f, &mut x, &|_| {}, LbfgsOptions::default());
        assert!(r.converged, "{r:?}");
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn projection_is_respected() {
        // minimize (x+1)² subject to x ≥ 0
        let mut f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] + 1.0);
            (x[0] + 1.0).powi(2)
        };
        let mut x = vec![3.0];
        let r = minimize(&mut f, &mut x, &|x: &mut [f64]| x[0] = x[0].max(0.0), LbfgsOptions::default());
        assert_eq!(x[0], 0.0);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    proptest! {
        #[test]
        fn history_is_non_increasing(c in prop::collection::vec(-3.0..3.0f64, 6), w in prop::collection::vec(0.1..50.0f64, 6)) {
            let mut f = |x: &[f64], g: &mut [f64]| {
                let mut v = 0.0;
                for i in 0..6 {
                    let d = x[i] - c[i];
                    v += w[i] * (d * d + 0.1 * d.powi(4));
                    g[i] = w[i] * (2.0 * d + 0.4 * d.powi(3));
                }
                v
            };
            let mut x = vec![0.0; 6];
            let r = minimize(&mut f, &mut x, &|_| {}, LbfgsOptions::default());
            prop_assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(r.converged);
        }
    }
}
