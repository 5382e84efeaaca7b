//! Monotone descent for smooth objectives: steepest descent or limited-memory
//! BFGS directions, both globalized by a backtracking line search with the
//! sufficient-decrease condition.
//!
//! The objective may restrict iterates to a linear subspace through
//! [`Objective::project`]; every gradient is projected before use, so iterates
//! started in the subspace stay there.

use std::collections::VecDeque;

use num_traits::Float;

use crate::scalar::{dot, norm, Scalar};

pub trait Objective<T: Scalar> {
    fn dim(&self) -> usize;

    /// Returns the value at `x` and writes the gradient into `grad`.
    fn eval(&self, x: &[T], grad: &mut [T]) -> T;

    /// Orthogonal projection onto the admissible subspace.
    fn project(&self, _v: &mut [T]) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Negative gradient with a Barzilai-Borwein trial step.
    SteepestDescent,
    Lbfgs { memory: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentParams<T> {
    pub method: Method,
    /// Stop once `|P grad| <= gtol`, or `gtol * (1 + |f|)` when `relative_to_value`.
    pub gtol: T,
    pub relative_to_value: bool,
    pub max_iter: usize,
    /// Sufficient-decrease constant.
    pub c1: T,
    pub shrink: T,
    pub max_backtracks: usize,
    pub record_history: bool,
}

impl<T: Scalar> DescentParams<T> {
    pub fn new(method: Method, gtol: T, max_iter: usize) -> Self {
        Self {
            method,
            gtol,
            relative_to_value: false,
            max_iter,
            c1: T::lit(1e-4),
            shrink: T::lit(0.5),
            max_backtracks: 60,
            record_history: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentStatus {
    Converged,
    IterationCap,
    /// The line search found no acceptable step along the steepest-descent direction.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct DescentReport<T> {
    pub x: Vec<T>,
    pub value: T,
    pub gradient_norm: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: DescentStatus,
    /// Objective value after each accepted step (empty unless requested).
    pub history: Vec<T>,
}

struct Evaluator<'a, T: Scalar, O: Objective<T>> {
    obj: &'a O,
    count: usize,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Scalar, O: Objective<T>> Evaluator<'_, T, O> {
    fn eval(&mut self, x: &[T], g: &mut [T]) -> T {
        self.count += 1;
        let f = self.obj.eval(x, g);
        self.obj.project(g);
        f
    }
}

fn threshold<T: Scalar>(p: &DescentParams<T>, f: T) -> T {
    if p.relative_to_value {
        p.gtol * (T::one() + f.mag())
    } else {
        p.gtol
    }
}

/// Two-loop recursion: `d = -H g` from stored curvature pairs.
fn lbfgs_direction<T: Scalar>(g: &[T], pairs: &VecDeque<(Vec<T>, Vec<T>, T)>) -> Vec<T> {
    let mut q: Vec<T> = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = *rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi = *qi - a * *yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi = *qi * gamma;
        }
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = *rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi = *qi + (a - b) * *si;
        }
    }
    q.into_iter().map(|v| -v).collect()
}

/// Minimizes `obj` from `x0` (projected into the admissible subspace first).
pub fn minimize<T: Scalar, O: Objective<T>>(obj: &O, x0: &[T], params: &DescentParams<T>) -> DescentReport<T> {
    let n = obj.dim();
    assert_eq!(x0.len(), n, "initial point has wrong dimension");
    let mut ev = Evaluator {
        obj,
        count: 0,
        _marker: std::marker::PhantomData,
    };
    let mut x = x0.to_vec();
    obj.project(&mut x);
    let mut g = vec![T::zero(); n];
    let mut f = ev.eval(&x, &mut g);
    let mut gnorm = norm(&g);
    let mut history = Vec::new();
    if params.record_history {
        history.push(f);
    }
    let memory = match params.method {
        Method::Lbfgs { memory } => memory.max(1),
        Method::SteepestDescent => 0,
    };
    let mut pairs: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::with_capacity(memory);
    let mut bb_step: Option<T> = None;
    let mut x_new = vec![T::zero(); n];
    let mut g_new = vec![T::zero(); n];
    let eps_f = T::lit(1e-13);

    let mut iterations = 0;
    let mut status = DescentStatus::IterationCap;
    while iterations < params.max_iter {
        if gnorm <= threshold(params, f) {
            status = DescentStatus::Converged;
            break;
        }
        let mut use_gradient = pairs.is_empty();
        let mut accepted = false;
        for _attempt in 0..2 {
            let (d, alpha0) = if use_gradient {
                let d: Vec<T> = g.iter().map(|v| -*v).collect();
                let a = match (params.method, bb_step) {
                    (Method::SteepestDescent, Some(a)) => a,
                    _ => T::one() / Float::max(gnorm, T::min_positive_value()) * Float::min(T::one(), Float::max(f.mag(), T::lit(1e-3))),
                };
                (d, a)
            } else {
                let mut d = lbfgs_direction(&g, &pairs);
                obj.project(&mut d);
                (d, T::one())
            };
            let slope = dot(&g, &d);
            if !(slope < T::zero()) {
                pairs.clear();
                use_gradient = true;
                continue;
            }
            let mut alpha = alpha0;
            for _ in 0..params.max_backtracks {
                for i in 0..n {
                    x_new[i] = x[i] + alpha * d[i];
                }
                let f_trial = ev.eval(&x_new, &mut g_new);
                let armijo = f_trial <= f + params.c1 * alpha * slope;
                // near the round-off floor of f, the slope form of the same condition
                let approx = (f_trial - f).mag() <= eps_f * (f.mag() + T::min_positive_value())
                    && dot(&g_new, &d) <= (T::one() - T::lit(2.0) * params.c1) * slope.mag()
                    && f_trial.is_finite();
                if f_trial.is_finite() && (armijo || approx) {
                    accepted = true;
                    let s: Vec<T> = d.iter().map(|v| alpha * *v).collect();
                    let y: Vec<T> = g_new.iter().zip(&g).map(|(a, b)| *a - *b).collect();
                    let sy = dot(&s, &y);
                    if sy > T::zero() {
                        bb_step = Some(dot(&s, &s) / sy);
                        if memory > 0 {
                            if pairs.len() == memory {
                                pairs.pop_front();
                            }
                            pairs.push_back((s, y, T::one() / sy));
                        }
                    }
                    std::mem::swap(&mut x, &mut x_new);
                    std::mem::swap(&mut g, &mut g_new);
                    f = f_trial;
                    gnorm = norm(&g);
                    break;
                }
                alpha = alpha * params.shrink;
            }
            if accepted {
                break;
            }
            if use_gradient {
                break;
            }
            pairs.clear();
            use_gradient = true;
        }
        if !accepted {
            status = DescentStatus::Stalled;
            break;
        }
        iterations += 1;
        if params.record_history {
            history.push(f);
        }
    }
    if status == DescentStatus::IterationCap && gnorm <= threshold(params, f) {
        status = DescentStatus::Converged;
    }
    DescentReport {
        x,
        value: f,
        gradient_norm: gnorm,
        iterations,
        evaluations: ev.count,
        status,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl Objective<f64> for Rosenbrock {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, x: &[f64], g: &mut [f64]) -> f64 {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        }
    }

    struct Quadratic {
        diag: Vec<f64>,
    }

    impl Objective<f64> for Quadratic {
        fn dim(&self) -> usize {
            self.diag.len()
        }
        fn eval(&self, x: &[f64], g: &mut [f64]) -> f64 {
            let mut f = 0.0;
            for i in 0..x.len() {
                g[i] = self.diag[i] * (x[i] - 1.0);
                f += 0.5 * self.diag[i] * (x[i] - 1.0).powi(2);
            }
            f
        }
        fn project(&self, v: &mut [f64]) {
            // keep the last coordinate fixed
            let last = v.len() - 1;
            v[last] = 0.0;
        }
    }

    #[test]
    fn lbfgs_solves_rosenbrock() {
        let mut p = DescentParams::new(Method::Lbfgs { memory: 8 }, 1e-10, 1000);
        p.record_history = true;
        let r = minimize(&Rosenbrock, &[-1.2, 1.0], &p);
        assert_eq!(r.status, DescentStatus::Converged);
        assert!((r.x[0] - 1.0).abs() < 1e-8 && (r.x[1] - 1.0).abs() < 1e-8);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn steepest_descent_converges_on_quadratic() {
        let q = Quadratic { diag: vec![1.0, 10.0, 3.0, 7.0] };
        let p = DescentParams::new(Method::SteepestDescent, 1e-10, 10_000);
        let r = minimize(&q, &[0.0; 4], &p);
        assert_eq!(r.status, DescentStatus::Converged);
        for i in 0..3 {
            assert!((r.x[i] - 1.0).abs() < 1e-9);
        }
        assert_eq!(r.x[3], 0.0, "projected coordinate must not move");
    }

    #[test]
    fn iteration_cap_reported() {
        let p = DescentParams::new(Method::SteepestDescent, 1e-14, 3);
        let r = minimize(&Rosenbrock, &[-1.2, 1.0], &p);
        assert_eq!(r.status, DescentStatus::IterationCap);
        assert_eq!(r.iterations, 3);
    }
}
