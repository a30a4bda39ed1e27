//! Multinomial Naive Bayes over nonnegative (possibly fractional) feature weights.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::features::{FeatureMatrix, SparseVector};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    /// Additive smoothing.
    pub alpha: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        NbParams { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel<T> {
    /// ln P(class), indexed by label.
    pub log_prior: [T; 2],
    /// ln P(feature | class), indexed by label then feature.
    pub log_likelihood: [Vec<T>; 2],
}

pub(super) fn fit<T: Real>(p: &NbParams, x: &FeatureMatrix<T>, y: &[Label]) -> NbModel<T> {
    let d = x.n_features;
    let alpha = T::of(p.alpha);
    let mut mass = [vec![T::zero(); d], vec![T::zero(); d]];
    let mut docs = [0usize; 2];
    for (row, &label) in x.rows.iter().zip(y) {
        let c = label.as_u8() as usize;
        docs[c] += 1;
        for (j, v) in row.entries.iter() {
            mass[c][j] = mass[c][j] + v;
        }
    }
    let n = T::of_usize(y.len());
    let log_prior = [0, 1].map(|c| (T::of_usize(docs[c]) / n).ln());
    let log_likelihood = [0, 1].map(|c| {
        let total: T = mass[c].iter().copied().sum::<T>() + alpha * T::of_usize(d);
        mass[c]
            .iter()
            .map(|&m| ((m + alpha) / total).ln())
            .collect()
    });
    NbModel {
        log_prior,
        log_likelihood,
    }
}

impl<T: Real> NbModel<T> {
    /// Unnormalized log posterior per class.
    pub fn log_joint(&self, x: &SparseVector<T>) -> [T; 2] {
        [0, 1].map(|c| self.log_prior[c] + x.dot_dense(&self.log_likelihood[c]))
    }

    /// Posterior log-odds, spam over ham.
    pub(super) fn scores(&self, x: &FeatureMatrix<T>) -> Vec<T> {
        x.rows
            .iter()
            .map(|r| {
                let [ham, spam] = self.log_joint(&r.entries);
                spam - ham
            })
            .collect()
    }
}
