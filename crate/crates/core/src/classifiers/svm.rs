//! C-SVM with a sigmoid kernel, trained by SMO with second-order working-set
//! selection. Indefinite kernels are handled by clamping the curvature of a
//! pair to a small positive constant.

use std::collections::HashMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::index::InvertedIndex;
use crate::corpus::Label;
use crate::features::{FeatureMatrix, SparseVector};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    pub coef0: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// Kernel column cache budget.
    pub cache_mb: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: 1.0,
            coef0: 0.0,
            tol: 1e-3,
            cache_mb: 256,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SvmModel<T: Real> {
    pub gamma: T,
    pub coef0: T,
    pub n_features: usize,
    pub support: Vec<SparseVector<T>>,
    /// alpha_i * y_i for each support vector.
    pub dual_coef: Vec<T>,
    pub bias: T,
    pub iterations: usize,
    #[serde(skip)]
    index: OnceLock<InvertedIndex<T>>,
}

impl<T: Real> std::fmt::Debug for SvmModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SvmModel")
            .field("n_support", &self.support.len())
            .field("bias", &self.bias)
            .finish()
    }
}

impl<T: Real> Clone for SvmModel<T> {
    fn clone(&self) -> Self {
        SvmModel {
            gamma: self.gamma,
            coef0: self.coef0,
            n_features: self.n_features,
            support: self.support.clone(),
            dual_coef: self.dual_coef.clone(),
            bias: self.bias,
            iterations: self.iterations,
            index: OnceLock::new(),
        }
    }
}

impl<T: Real> PartialEq for SvmModel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support
            && self.dual_coef == other.dual_coef
            && self.bias == other.bias
    }
}

/// Columns of the signed kernel matrix `Q_ij = y_i y_j k(x_i, x_j)`, with LRU eviction.
struct KernelCache<'a, T> {
    rows: &'a [FeatureVecRef<'a, T>],
    y: &'a [T],
    index: InvertedIndex<T>,
    gamma: T,
    coef0: T,
    columns: HashMap<usize, (Vec<T>, u64)>,
    capacity: usize,
    clock: u64,
    scratch: Vec<T>,
}

type FeatureVecRef<'a, T> = &'a SparseVector<T>;

impl<'a, T: Real> KernelCache<'a, T> {
    fn column(&mut self, i: usize) -> &[T] {
        self.clock += 1;
        let clock = self.clock;
        if !self.columns.contains_key(&i) {
            if self.columns.len() >= self.capacity {
                let oldest = *self
                    .columns
                    .iter()
                    .min_by_key(|(_, (_, used))| *used)
                    .map(|(k, _)| k)
                    .expect("non-empty cache");
                self.columns.remove(&oldest);
            }
            self.index.dots(self.rows[i], &mut self.scratch);
            let yi = self.y[i];
            let col = self
                .scratch
                .iter()
                .zip(self.y)
                .map(|(&d, &yt)| yi * yt * (self.gamma * d + self.coef0).tanh())
                .collect();
            self.columns.insert(i, (col, clock));
        }
        let entry = self.columns.get_mut(&i).expect("inserted above");
        entry.1 = clock;
        &entry.0
    }
}

pub(super) fn fit<T: Real>(p: &SvmParams, x: &FeatureMatrix<T>, labels: &[Label]) -> SvmModel<T> {
    let n = labels.len();
    let c = T::of(p.c);
    let gamma = T::of(p.gamma);
    let coef0 = T::of(p.coef0);
    let tol = T::of(p.tol);
    let tau = T::of(1e-12);
    let y: Vec<T> = labels
        .iter()
        .map(|l| if l.is_spam() { T::one() } else { -T::one() })
        .collect();
    let rows: Vec<&SparseVector<T>> = x.rows.iter().map(|r| &r.entries).collect();
    let diag: Vec<T> = rows
        .iter()
        .map(|r| (gamma * r.norm_sq() + coef0).tanh())
        .collect();
    let capacity = ((p.cache_mb << 20) / (n.max(1) * std::mem::size_of::<T>())).max(2);
    let mut cache = KernelCache {
        rows: &rows,
        y: &y,
        index: InvertedIndex::build(rows.iter().copied(), x.n_features),
        gamma,
        coef0,
        columns: HashMap::new(),
        capacity,
        clock: 0,
        scratch: vec![T::zero(); n],
    };

    let mut alpha = vec![T::zero(); n];
    let mut grad = vec![-T::one(); n];
    let max_iter = (100 * n).max(10_000_000);
    let mut iterations = 0;
    let at_upper = |a: T| a >= c;
    let at_lower = |a: T| a <= T::zero();

    while iterations < max_iter {
        // first index: maximal violating candidate
        let mut gmax = T::neg_infinity();
        let mut i_sel = None;
        for t in 0..n {
            let v = if y[t] > T::zero() {
                if at_upper(alpha[t]) {
                    continue;
                } else {
                    -grad[t]
                }
            } else if at_lower(alpha[t]) {
                continue;
            } else {
                grad[t]
            };
            if v >= gmax {
                gmax = v;
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else { break };
        let qi = cache.column(i).to_vec();
        // second index: largest objective decrease
        let mut gmax2 = T::neg_infinity();
        let mut best_obj = T::infinity();
        let mut j_sel = None;
        for t in 0..n {
            let (grad_diff, quad) = if y[t] > T::zero() {
                if at_lower(alpha[t]) {
                    continue;
                }
                gmax2 = gmax2.max(grad[t]);
                (
                    gmax + grad[t],
                    diag[i] + diag[t] - T::of(2.0) * y[i] * qi[t],
                )
            } else {
                if at_upper(alpha[t]) {
                    continue;
                }
                gmax2 = gmax2.max(-grad[t]);
                (
                    gmax - grad[t],
                    diag[i] + diag[t] + T::of(2.0) * y[i] * qi[t],
                )
            };
            if grad_diff > T::zero() {
                let obj = -(grad_diff * grad_diff) / quad.max(tau);
                if obj <= best_obj {
                    best_obj = obj;
                    j_sel = Some(t);
                }
            }
        }
        if gmax + gmax2 < tol {
            break;
        }
        let Some(j) = j_sel else { break };
        iterations += 1;
        let qj = cache.column(j).to_vec();

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let quad = (diag[i] + diag[j] + T::of(2.0) * qi[j]).max(tau);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai = ai + delta;
            aj = aj + delta;
            if diff > T::zero() {
                if aj < T::zero() {
                    aj = T::zero();
                    ai = diff;
                }
            } else if ai < T::zero() {
                ai = T::zero();
                aj = -diff;
            }
            if diff > T::zero() {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (diag[i] + diag[j] - T::of(2.0) * qi[j]).max(tau);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai = ai - delta;
            aj = aj + delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < T::zero() {
                aj = T::zero();
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < T::zero() {
                ai = T::zero();
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..n {
            grad[t] = grad[t] + qi[t] * di + qj[t] * dj;
        }
    }
    if iterations >= max_iter {
        log::warn!("SMO stopped at the iteration cap ({max_iter})");
    }

    // offset from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (T::infinity(), T::neg_infinity());
    let (mut free_sum, mut free) = (T::zero(), 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if at_upper(alpha[t]) {
            if y[t] < T::zero() {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else if at_lower(alpha[t]) {
            if y[t] > T::zero() {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else {
            free += 1;
            free_sum = free_sum + yg;
        }
    }
    let rho = if free > 0 {
        free_sum / T::of_usize(free)
    } else {
        (ub + lb) / T::of(2.0)
    };

    let mut support = Vec::new();
    let mut dual_coef = Vec::new();
    for t in 0..n {
        if alpha[t] > T::zero() {
            support.push(rows[t].clone());
            dual_coef.push(alpha[t] * y[t]);
        }
    }
    SvmModel {
        gamma,
        coef0,
        n_features: x.n_features,
        support,
        dual_coef,
        bias: -rho,
        iterations,
        index: OnceLock::new(),
    }
}

impl<T: Real> SvmModel<T> {
    fn index(&self) -> &InvertedIndex<T> {
        self.index
            .get_or_init(|| InvertedIndex::build(self.support.iter(), self.n_features))
    }

    /// Decision value `sum_i alpha_i y_i k(sv_i, x) + b`.
    pub fn decision(&self, x: &SparseVector<T>, dots: &mut [T]) -> T {
        self.index().dots(x, dots);
        let kernel_sum: T = dots
            .iter()
            .zip(&self.dual_coef)
            .map(|(&d, &a)| a * (self.gamma * d + self.coef0).tanh())
            .sum();
        kernel_sum + self.bias
    }

    pub(super) fn scores(&self, x: &FeatureMatrix<T>) -> Vec<T> {
        let n = self.support.len();
        x.rows
            .par_iter()
            .map_init(
                || vec![T::zero(); n],
                |buf, r| self.decision(&r.entries, buf),
            )
            .collect()
    }
}
