//! Train/test splitting, few-shot sampling, stratified folds and the
//! cross-validated feature-budget search.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::classifiers::{fit, predict, ClassifierSpec};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::{fit_vocabulary, FeatureMatrix, TfidfOptions};
use crate::metrics::score;
use crate::scalar::Real;
use crate::textprep::TokenizedDoc;

// Independent RNG streams per sampler so the same seed never correlates them.
const SPLIT_STREAM: u64 = 1;
const FEW_SHOT_STREAM: u64 = 2;
const FOLD_STREAM: u64 = 3;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Number of training samples for a cell: a fixed count or the whole training split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShotCount {
    Count(usize),
    Full,
}

impl ShotCount {
    pub const DEFAULT_GRID: [ShotCount; 8] = [
        ShotCount::Count(4),
        ShotCount::Count(8),
        ShotCount::Count(16),
        ShotCount::Count(32),
        ShotCount::Count(64),
        ShotCount::Count(128),
        ShotCount::Count(256),
        ShotCount::Full,
    ];

    pub fn is_full(self) -> bool {
        self == ShotCount::Full
    }
}

impl Ord for ShotCount {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ShotCount::Count(a), ShotCount::Count(b)) => a.cmp(b),
            (ShotCount::Count(_), ShotCount::Full) => Ordering::Less,
            (ShotCount::Full, ShotCount::Count(_)) => Ordering::Greater,
            (ShotCount::Full, ShotCount::Full) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ShotCount {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ShotCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShotCount::Count(k) => write!(f, "{k}"),
            ShotCount::Full => f.write_str("full"),
        }
    }
}

impl FromStr for ShotCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(ShotCount::Full);
        }
        match s.parse::<usize>() {
            Ok(k) if k > 0 => Ok(ShotCount::Count(k)),
            _ => Err(Error::Config(format!(
                "invalid k {s:?}, expected a positive count or \"full\""
            ))),
        }
    }
}

impl Serialize for ShotCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ShotCount::Count(k) => s.serialize_u64(*k as u64),
            ShotCount::Full => s.serialize_str("full"),
        }
    }
}

impl<'de> Deserialize<'de> for ShotCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(usize),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(k) if k > 0 => Ok(ShotCount::Count(k)),
            Repr::Num(_) => Err(serde::de::Error::custom("k must be positive")),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        SplitSpec {
            train_fraction: 0.8,
            seed,
            stratified: true,
        }
    }
}

/// Disjoint, exhaustive index sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn class_members(labels: &[Label], of: impl Fn(usize) -> usize) -> [Vec<usize>; 2] {
    let mut members = [Vec::new(), Vec::new()];
    for (i, l) in labels.iter().enumerate() {
        members[l.as_u8() as usize].push(of(i));
    }
    members
}

pub fn split(labels: &[Label], spec: &SplitSpec) -> Result<Split> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train_fraction {} outside (0, 1)",
            spec.train_fraction
        )));
    }
    let mut rng = rng(spec.seed, SPLIT_STREAM);
    let groups: Vec<Vec<usize>> = if spec.stratified {
        let members = class_members(labels, |i| i);
        for (c, m) in members.iter().enumerate() {
            if m.len() < 2 {
                return Err(Error::Stratification(format!(
                    "class {} has {} member(s), need at least 2",
                    Label::try_from(c as u8).expect("0 or 1"),
                    m.len()
                )));
            }
        }
        members.into()
    } else {
        if labels.len() < 2 {
            return Err(Error::Stratification("need at least 2 messages".into()));
        }
        vec![(0..labels.len()).collect()]
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut g in groups {
        g.shuffle(&mut rng);
        let n = g.len();
        let n_train = ((n as f64 * spec.train_fraction).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&g[..n_train]);
        test.extend_from_slice(&g[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotSample {
    pub k: ShotCount,
    pub seed: u64,
    /// Positions into the full message list, sorted ascending.
    pub indices: Vec<usize>,
}

/// Per-class counts for a draw of `k` from classes of the given sizes:
/// proportional by largest remainder (ties to ham), then at least one per
/// non-empty class, then capped by availability.
pub fn allocate_per_class(sizes: [usize; 2], k: usize) -> [usize; 2] {
    let total: usize = sizes.iter().sum();
    let mut alloc = [0usize; 2];
    if total == 0 || k == 0 {
        return alloc;
    }
    let k = k.min(total);
    let exact: Vec<f64> = sizes
        .iter()
        .map(|&s| s as f64 * k as f64 / total as f64)
        .collect();
    for c in 0..2 {
        alloc[c] = exact[c].floor() as usize;
    }
    let mut remaining = k - alloc.iter().sum::<usize>();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.partial_cmp(&ra)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    for &c in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        alloc[c] += 1;
        remaining -= 1;
    }
    if k >= 2 {
        for c in 0..2 {
            let other = 1 - c;
            if sizes[c] > 0 && alloc[c] == 0 && alloc[other] > 1 {
                alloc[c] = 1;
                alloc[other] -= 1;
            }
        }
    }
    for c in 0..2 {
        let other = 1 - c;
        if alloc[c] > sizes[c] {
            let surplus = alloc[c] - sizes[c];
            alloc[c] = sizes[c];
            alloc[other] += surplus;
        }
    }
    alloc
}

/// Seeded stratified draw of `k` training positions.
///
/// `labels` is indexed by the values in `train`.
pub fn sample_few_shot(
    train: &[usize],
    labels: &[Label],
    k: ShotCount,
    seed: u64,
) -> Result<FewShotSample> {
    let count = match k {
        ShotCount::Full => {
            let mut indices = train.to_vec();
            indices.sort_unstable();
            return Ok(FewShotSample { k, seed, indices });
        }
        ShotCount::Count(c) => c,
    };
    if count > train.len() {
        return Err(Error::FewShot(format!(
            "k = {count} exceeds the {} training messages",
            train.len()
        )));
    }
    let members = class_members(&train.iter().map(|&i| labels[i]).collect::<Vec<_>>(), |p| {
        train[p]
    });
    let both = members.iter().all(|m| !m.is_empty());
    if both && count < 2 {
        return Err(Error::FewShot(format!(
            "k = {count} cannot hold both classes"
        )));
    }
    let alloc = allocate_per_class([members[0].len(), members[1].len()], count);
    let mut rng = rng(seed, FEW_SHOT_STREAM);
    let mut indices = Vec::with_capacity(count);
    for (mut m, take) in members.into_iter().zip(alloc) {
        m.shuffle(&mut rng);
        indices.extend_from_slice(&m[..take]);
    }
    indices.sort_unstable();
    Ok(FewShotSample { k, seed, indices })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub n_folds: usize,
    pub fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn held_out(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == fold)
            .collect()
    }

    pub fn training(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] != fold)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_folds];
        for &f in &self.fold_of {
            s[f] += 1;
        }
        s
    }
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin,
/// continuing the deal position across classes so fold sizes differ by at most one.
pub fn make_folds(labels: &[Label], n_folds: usize, seed: u64) -> Result<FoldAssignment> {
    if n_folds < 2 {
        return Err(Error::Config("need at least 2 folds".into()));
    }
    let members = class_members(labels, |i| i);
    for (c, m) in members.iter().enumerate() {
        if !m.is_empty() && m.len() < n_folds {
            return Err(Error::Stratification(format!(
                "class {} has {} member(s), fewer than {n_folds} folds",
                Label::try_from(c as u8).expect("0 or 1"),
                m.len()
            )));
        }
    }
    if labels.is_empty() {
        return Err(Error::Empty("no labels to fold"));
    }
    let mut rng = rng(seed, FOLD_STREAM);
    let mut fold_of = vec![0; labels.len()];
    let mut pos = 0;
    for mut m in members {
        m.shuffle(&mut rng);
        for i in m {
            fold_of[i] = pos % n_folds;
            pos += 1;
        }
    }
    Ok(FoldAssignment { n_folds, fold_of })
}

/// Feature budgets searched during tuning.
pub const DEFAULT_FEATURE_GRID: [usize; 5] = [150, 500, 1000, 2000, 3000];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: usize,
    /// Mean held-out F1 per candidate; `None` when a fold failed.
    pub candidates: Vec<(usize, Option<f64>)>,
}

/// Pick the feature budget with the best mean F1 over stratified folds.
/// The vocabulary is refit on each fold's training portion. Ties go to the
/// smaller budget.
pub fn tune_feature_count<T: Real>(
    docs: &[TokenizedDoc],
    labels: &[Label],
    grid: &[usize],
    spec: &ClassifierSpec,
    opts: TfidfOptions,
    n_folds: usize,
    seed: u64,
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(Error::Config("empty feature grid".into()));
    }
    if docs.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} docs vs {} labels",
            docs.len(),
            labels.len()
        )));
    }
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let folds = make_folds(labels, n_folds, seed)?;
    let jobs: Vec<(usize, usize)> = grid
        .iter()
        .flat_map(|&g| (0..n_folds).map(move |f| (g, f)))
        .collect();
    let scores: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(budget, fold)| {
            let train = folds.training(fold);
            let held = folds.held_out(fold);
            let pick = |idx: &[usize]| -> (Vec<TokenizedDoc>, Vec<Label>) {
                idx.iter().map(|&i| (docs[i].clone(), labels[i])).unzip()
            };
            let (tr_docs, tr_y) = pick(&train);
            let (ho_docs, ho_y) = pick(&held);
            let vocab = fit_vocabulary(&tr_docs, budget)?;
            let x_train = FeatureMatrix::<T>::from_docs(&tr_docs, &vocab, opts);
            let x_held = FeatureMatrix::<T>::from_docs(&ho_docs, &vocab, opts);
            let model = fit(spec, &x_train, &tr_y)?;
            let pred = predict(&model, &x_held)?;
            Ok(score(&ho_y, &pred)?.1.f1)
        })
        .collect();
    let mut candidates = Vec::with_capacity(grid.len());
    for (ci, &budget) in grid.iter().enumerate() {
        let fold_scores = &scores[ci * n_folds..(ci + 1) * n_folds];
        let mut sum = 0.0;
        let mut failed = None;
        for s in fold_scores {
            match s {
                Ok(f1) => sum += f1,
                Err(e) => failed = Some(e.to_string()),
            }
        }
        match failed {
            Some(reason) => {
                log::warn!("feature budget {budget} excluded: {reason}");
                candidates.push((budget, None));
            }
            None => candidates.push((budget, Some(sum / n_folds as f64))),
        }
    }
    let best = candidates
        .iter()
        .filter_map(|&(b, s)| s.map(|s| (b, s)))
        .fold(None::<(usize, f64)>, |acc, (b, s)| match acc {
            Some((_, best)) if s <= best => acc,
            _ => Some((b, s)),
        })
        .map(|(b, _)| b)
        .ok_or_else(|| Error::Validation("every feature budget failed".into()))?;
    Ok(TuneResult { best, candidates })
}
