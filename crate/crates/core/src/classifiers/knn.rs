//! Nearest-neighbour vote under Euclidean distance.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::index::InvertedIndex;
use crate::corpus::Label;
use crate::features::{FeatureMatrix, SparseVector};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 1 }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KnnModel<T: Real> {
    pub k: usize,
    pub n_features: usize,
    pub rows: Vec<SparseVector<T>>,
    pub labels: Vec<Label>,
    #[serde(skip)]
    index: OnceLock<(InvertedIndex<T>, Vec<T>)>,
}

impl<T: Real> std::fmt::Debug for KnnModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KnnModel")
            .field("k", &self.k)
            .field("n_rows", &self.rows.len())
            .finish()
    }
}

impl<T: Real> Clone for KnnModel<T> {
    fn clone(&self) -> Self {
        KnnModel {
            k: self.k,
            n_features: self.n_features,
            rows: self.rows.clone(),
            labels: self.labels.clone(),
            index: OnceLock::new(),
        }
    }
}

impl<T: Real> PartialEq for KnnModel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.rows == other.rows && self.labels == other.labels
    }
}

pub(super) fn fit<T: Real>(p: &KnnParams, x: &FeatureMatrix<T>, y: &[Label]) -> KnnModel<T> {
    KnnModel {
        k: p.k.max(1),
        n_features: x.n_features,
        rows: x.rows.iter().map(|r| r.entries.clone()).collect(),
        labels: y.to_vec(),
        index: OnceLock::new(),
    }
}

impl<T: Real> KnnModel<T> {
    fn index(&self) -> &(InvertedIndex<T>, Vec<T>) {
        self.index.get_or_init(|| {
            let idx = InvertedIndex::build(self.rows.iter(), self.n_features);
            let norms = self.rows.iter().map(SparseVector::norm_sq).collect();
            (idx, norms)
        })
    }

    /// Fraction of spam among the k nearest training rows. Distance ties
    /// are ordered ham first, then by training position.
    fn score_one(&self, x: &SparseVector<T>, dots: &mut [T]) -> T {
        let (idx, norms) = self.index();
        idx.dots(x, dots);
        let xn = x.norm_sq();
        let mut cand: Vec<(T, Label, usize)> = dots
            .iter()
            .zip(norms)
            .enumerate()
            .map(|(i, (&d, &n))| ((n + xn - T::of(2.0) * d).max(T::zero()), self.labels[i], i))
            .collect();
        let k = self.k.min(cand.len());
        let order = |a: &(T, Label, usize), b: &(T, Label, usize)| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        };
        if k < cand.len() {
            cand.select_nth_unstable_by(k - 1, order);
        }
        let spam = cand[..k].iter().filter(|c| c.1.is_spam()).count();
        T::of_usize(spam) / T::of_usize(k)
    }

    pub(super) fn scores(&self, x: &FeatureMatrix<T>) -> Vec<T> {
        let n = self.index().0.n_rows();
        x.rows
            .par_iter()
            .map_init(
                || vec![T::zero(); n],
                |buf, r| self.score_one(&r.entries, buf),
            )
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::tests::matrix;
    use crate::classifiers::{fit as fit_model, predict, Algorithm, ClassifierSpec};

    #[test]
    fn exact_match_takes_its_label() {
        let x = matrix(&[&[(0, 1.0)], &[(1, 1.0)], &[(0, 0.6), (1, 0.8)]], 2);
        let y = [Label::Ham, Label::Spam, Label::Spam];
        let m = fit_model(&ClassifierSpec::baseline(Algorithm::Knn, 0), &x, &y).unwrap();
        assert_eq!(predict(&m, &x).unwrap(), y);
    }

    #[test]
    fn equidistant_neighbours_resolve_to_ham() {
        let x = matrix(&[&[(0, 1.0)], &[(1, 1.0)]], 2);
        let m = fit_model(
            &ClassifierSpec::baseline(Algorithm::Knn, 0),
            &x,
            &[Label::Spam, Label::Ham],
        )
        .unwrap();
        let probe = matrix(&[&[(0, 0.5), (1, 0.5)]], 2);
        assert_eq!(predict(&m, &probe).unwrap(), [Label::Ham]);
    }
}
