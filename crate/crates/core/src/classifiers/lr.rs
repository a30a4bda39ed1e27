//! L2-regularized logistic regression fitted with L-BFGS.
//!
//! Minimizes `C * sum_i logloss(y_i, w.x_i + b) + ||w||^2 / 2`; the
//! intercept is not penalized.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::features::FeatureMatrix;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    /// Inverse regularization strength.
    pub c: f64,
    /// Stop when the gradient's Euclidean norm drops to this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams {
            c: 1.0,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    /// Gradient norm at the returned parameters.
    pub grad_norm: f64,
    pub iterations: usize,
}

fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus<T: Real>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

/// Objective value and gradient; the last gradient entry is the intercept.
pub fn logistic_objective<T: Real>(
    x: &FeatureMatrix<T>,
    y: &[Label],
    params: &[T],
    c: T,
) -> (T, Vec<T>) {
    let d = x.n_features;
    let (w, b) = (&params[..d], params[d]);
    let mut grad = vec![T::zero(); d + 1];
    let mut loss = T::zero();
    for (row, &label) in x.rows.iter().zip(y) {
        let z = row.entries.dot_dense(w) + b;
        let target = if label.is_spam() { T::one() } else { T::zero() };
        // -[t ln s(z) + (1-t) ln(1 - s(z))] = softplus(z) - t z
        loss = loss + softplus(z) - target * z;
        let r = c * (sigmoid(z) - target);
        for (j, v) in row.entries.iter() {
            grad[j] = grad[j] + r * v;
        }
        grad[d] = grad[d] + r;
    }
    let mut f = c * loss;
    for j in 0..d {
        f = f + w[j] * w[j] / T::of(2.0);
        grad[j] = grad[j] + w[j];
    }
    (f, grad)
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub(super) fn fit<T: Real>(p: &LrParams, x: &FeatureMatrix<T>, y: &[Label]) -> LrModel<T> {
    const HISTORY: usize = 10;
    let c = T::of(p.c);
    let tol = T::of(p.tol);
    let dim = x.n_features + 1;
    let mut theta = vec![T::zero(); dim];
    let (mut f, mut g) = logistic_objective(x, y, &theta, c);
    let mut memory: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::with_capacity(HISTORY);
    let mut iterations = 0;
    while iterations < p.max_iter && norm(&g) > tol {
        iterations += 1;
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, yv, rho) in memory.iter().rev() {
            let a = *rho * dot(s, &q);
            q.iter_mut()
                .zip(yv)
                .for_each(|(qi, &yi)| *qi = *qi - a * yi);
            alphas.push(a);
        }
        let gamma = match memory.back() {
            Some((s, yv, _)) => dot(s, yv) / dot(yv, yv),
            None => T::one() / norm(&g).max(T::one()),
        };
        q.iter_mut().for_each(|v| *v = *v * gamma);
        for ((s, yv, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
            let b = *rho * dot(yv, &q);
            q.iter_mut()
                .zip(s)
                .for_each(|(qi, &si)| *qi = *qi + (a - b) * si);
        }
        let mut dir: Vec<T> = q.into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= T::zero() {
            memory.clear();
            dir = g.iter().map(|&v| -v).collect();
            slope = dot(&g, &dir);
        }
        // backtracking Armijo search
        let mut step = T::one();
        let accepted = loop {
            let trial: Vec<T> = theta
                .iter()
                .zip(&dir)
                .map(|(&t, &d)| t + step * d)
                .collect();
            let (ft, gt) = logistic_objective(x, y, &trial, c);
            if ft <= f + T::of(1e-4) * step * slope {
                break Some((trial, ft, gt));
            }
            step = step * T::of(0.5);
            if step < T::of(1e-20) {
                break None;
            }
        };
        let Some((next, fnext, gnext)) = accepted else {
            break;
        };
        let s: Vec<T> = next.iter().zip(&theta).map(|(&a, &b)| a - b).collect();
        let yv: Vec<T> = gnext.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > T::epsilon() * dot(&yv, &yv) {
            if memory.len() == HISTORY {
                memory.pop_front();
            }
            memory.push_back((s, yv, T::one() / sy));
        }
        if fnext == f && gnext == g {
            break;
        }
        theta = next;
        f = fnext;
        g = gnext;
    }
    let bias = theta.pop().expect("intercept");
    LrModel {
        weights: theta,
        bias,
        grad_norm: norm(&g).as_f64(),
        iterations,
    }
}

impl<T: Real> LrModel<T> {
    /// P(spam | x).
    pub(super) fn scores(&self, x: &FeatureMatrix<T>) -> Vec<T> {
        x.rows
            .iter()
            .map(|r| sigmoid(r.entries.dot_dense(&self.weights) + self.bias))
            .collect()
    }
}
