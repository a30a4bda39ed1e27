//! Gradient-boosted regression trees on the logistic loss, with histogram
//! split finding over equal-frequency bins.
//!
//! Two growth policies: level-wise to a fixed depth, and leaf-wise
//! (best-first) to a leaf budget. Each round fits one tree to the first and
//! second derivatives of the loss at the current margins; leaf values are the
//! Newton step `-G / (H + lambda)` scaled by the learning rate.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::features::{FeatureMatrix, SparseVector};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Growth {
    LevelWise { max_depth: usize },
    LeafWise { max_leaves: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub growth: Growth,
    pub n_estimators: usize,
    pub learning_rate: f64,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    /// Minimum hessian sum per child.
    pub min_child_weight: f64,
    /// Minimum number of rows per child.
    pub min_data_in_leaf: usize,
    /// Histogram bins per feature, the zero bin included.
    pub max_bins: usize,
}

impl GbdtParams {
    pub fn xgb_like() -> Self {
        GbdtParams {
            growth: Growth::LevelWise { max_depth: 6 },
            n_estimators: 150,
            learning_rate: 0.01,
            lambda: 1.0,
            min_child_weight: 1.0,
            min_data_in_leaf: 1,
            max_bins: 256,
        }
    }

    pub fn lgbm_like() -> Self {
        GbdtParams {
            growth: Growth::LeafWise { max_leaves: 20 },
            n_estimators: 100,
            learning_rate: 0.01,
            lambda: 0.0,
            min_child_weight: 1.0,
            min_data_in_leaf: 20,
            max_bins: 255,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode<T> {
    Split {
        feature: u32,
        /// Rows with value <= threshold go left.
        threshold: T,
        left: u32,
        right: u32,
    },
    Leaf {
        value: T,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<T> {
    pub nodes: Vec<TreeNode<T>>,
}

impl<T: Real> Tree<T> {
    pub fn predict(&self, x: &SparseVector<T>) -> T {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x.get(*feature as usize) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[TreeNode<T>], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel<T> {
    /// Prior log-odds the trees start from.
    pub base_margin: T,
    pub trees: Vec<Tree<T>>,
}

impl<T: Real> GbdtModel<T> {
    pub fn margin(&self, x: &SparseVector<T>) -> T {
        self.trees
            .iter()
            .fold(self.base_margin, |acc, t| acc + t.predict(x))
    }

    pub(super) fn scores(&self, x: &FeatureMatrix<T>) -> Vec<T> {
        x.rows.iter().map(|r| self.margin(&r.entries)).collect()
    }
}

/// Per-feature bin upper bounds and the binned training rows.
struct Binned<T> {
    /// Upper bound of each nonzero bin; bin 0 holds the value 0.
    uppers: Vec<Vec<T>>,
    /// Start of each feature's bins in a flat histogram.
    offsets: Vec<usize>,
    total_bins: usize,
    /// Nonzero entries per row as (feature, bin), sorted by feature.
    rows: Vec<Vec<(u32, u16)>>,
}

/// Equal-frequency bin boundaries over the nonzero values of one feature.
fn bin_uppers<T: Real>(mut values: Vec<T>, max_nonzero_bins: usize) -> Vec<T> {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite feature values"));
    let mut distinct: Vec<(T, usize)> = Vec::new();
    for v in values.iter().copied() {
        match distinct.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => distinct.push((v, 1)),
        }
    }
    if distinct.len() <= max_nonzero_bins {
        return distinct.into_iter().map(|(v, _)| v).collect();
    }
    let total = values.len();
    let mut uppers = Vec::with_capacity(max_nonzero_bins);
    let mut acc = 0usize;
    let last = distinct.len() - 1;
    for (i, (v, count)) in distinct.into_iter().enumerate() {
        acc += count;
        if acc * max_nonzero_bins >= (uppers.len() + 1) * total || i == last {
            uppers.push(v);
        }
    }
    uppers
}

fn bin_of<T: Real>(uppers: &[T], v: T) -> u16 {
    if v <= T::zero() {
        return 0;
    }
    let pos = uppers.partition_point(|&u| u < v);
    (pos.min(uppers.len() - 1) + 1) as u16
}

fn bin_features<T: Real>(x: &FeatureMatrix<T>, max_bins: usize) -> Binned<T> {
    let d = x.n_features;
    let mut columns: Vec<Vec<T>> = vec![Vec::new(); d];
    for row in &x.rows {
        for (j, v) in row.entries.iter() {
            if v > T::zero() {
                columns[j].push(v);
            }
        }
    }
    let nonzero_bins = max_bins.clamp(2, u16::MAX as usize) - 1;
    let uppers: Vec<Vec<T>> = columns
        .into_iter()
        .map(|c| bin_uppers(c, nonzero_bins))
        .collect();
    let mut offsets = Vec::with_capacity(d);
    let mut total_bins = 0;
    for u in &uppers {
        offsets.push(total_bins);
        total_bins += u.len() + 1;
    }
    let rows = x
        .rows
        .iter()
        .map(|r| {
            r.entries
                .iter()
                .filter(|(_, v)| *v > T::zero())
                .map(|(j, v)| (j as u32, bin_of(&uppers[j], v)))
                .collect()
        })
        .collect();
    Binned {
        uppers,
        offsets,
        total_bins,
        rows,
    }
}

#[derive(Clone, Copy, Default)]
struct Stat<T> {
    g: T,
    h: T,
    n: usize,
}

impl<T: Real> Stat<T> {
    fn add(&mut self, g: T, h: T) {
        self.g = self.g + g;
        self.h = self.h + h;
        self.n += 1;
    }

    fn minus(self, o: Stat<T>) -> Stat<T> {
        Stat {
            g: self.g - o.g,
            h: self.h - o.h,
            n: self.n - o.n,
        }
    }

    fn plus(self, o: Stat<T>) -> Stat<T> {
        Stat {
            g: self.g + o.g,
            h: self.h + o.h,
            n: self.n + o.n,
        }
    }
}

#[derive(Clone, Copy)]
struct SplitChoice<T> {
    feature: usize,
    bin: u16,
    gain: T,
}

struct Builder<'a, T> {
    binned: &'a Binned<T>,
    grad: &'a [T],
    hess: &'a [T],
    lambda: T,
    min_child_weight: T,
    min_data: usize,
    hist: Vec<Stat<T>>,
    touched: Vec<bool>,
}

impl<T: Real> Builder<'_, T> {
    fn totals(&self, rows: &[u32]) -> Stat<T> {
        let mut s = Stat::default();
        for &r in rows {
            s.add(self.grad[r as usize], self.hess[r as usize]);
        }
        s
    }

    fn score(&self, s: Stat<T>) -> T {
        s.g * s.g / (s.h + self.lambda)
    }

    fn leaf_value(&self, s: Stat<T>, lr: T) -> T {
        let den = s.h + self.lambda;
        if den > T::zero() {
            -s.g / den * lr
        } else {
            T::zero()
        }
    }

    fn admissible(&self, s: Stat<T>) -> bool {
        s.n >= self.min_data.max(1) && s.h >= self.min_child_weight
    }

    fn best_split(&mut self, rows: &[u32], total: Stat<T>) -> Option<SplitChoice<T>> {
        if rows.len() < 2 * self.min_data.max(1) || total.h < T::of(2.0) * self.min_child_weight {
            return None;
        }
        let mut features = Vec::new();
        for &r in rows {
            let (g, h) = (self.grad[r as usize], self.hess[r as usize]);
            for &(j, b) in &self.binned.rows[r as usize] {
                let j = j as usize;
                if !self.touched[j] {
                    self.touched[j] = true;
                    features.push(j);
                }
                self.hist[self.binned.offsets[j] + b as usize].add(g, h);
            }
        }
        features.sort_unstable();
        let parent = self.score(total);
        let mut best: Option<SplitChoice<T>> = None;
        for &j in &features {
            let start = self.binned.offsets[j];
            let nb = self.binned.uppers[j].len() + 1;
            let bins = &self.hist[start..start + nb];
            let nonzero = bins[1..].iter().fold(Stat::default(), |a, &s| a.plus(s));
            let mut left = total.minus(nonzero);
            for (b, &stat) in bins.iter().enumerate().take(nb - 1) {
                if b > 0 {
                    left = left.plus(stat);
                }
                let right = total.minus(left);
                if !self.admissible(left) || !self.admissible(right) {
                    continue;
                }
                let gain = (self.score(left) + self.score(right) - parent) / T::of(2.0);
                if gain > T::zero() && best.is_none_or(|s| gain > s.gain) {
                    best = Some(SplitChoice {
                        feature: j,
                        bin: b as u16,
                        gain,
                    });
                }
            }
        }
        for &j in &features {
            self.touched[j] = false;
            let start = self.binned.offsets[j];
            let nb = self.binned.uppers[j].len() + 1;
            self.hist[start..start + nb].fill(Stat::default());
        }
        best
    }

    fn partition(&self, rows: &[u32], split: &SplitChoice<T>) -> (Vec<u32>, Vec<u32>) {
        rows.iter().partition(|&&r| {
            let entries = &self.binned.rows[r as usize];
            let bin = entries
                .binary_search_by_key(&(split.feature as u32), |e| e.0)
                .map(|p| entries[p].1)
                .unwrap_or(0);
            bin <= split.bin
        })
    }
}

struct Pending<T> {
    node: usize,
    rows: Vec<u32>,
    total: Stat<T>,
    depth: usize,
    split: Option<SplitChoice<T>>,
}

/// Grow one tree; returns it and each training row's leaf value.
fn grow_tree<T: Real>(b: &mut Builder<'_, T>, p: &GbdtParams, n_rows: usize) -> (Tree<T>, Vec<T>) {
    let lr = T::of(p.learning_rate);
    let mut nodes: Vec<TreeNode<T>> = vec![TreeNode::Leaf { value: T::zero() }];
    let mut row_value = vec![T::zero(); n_rows];
    let root_rows: Vec<u32> = (0..n_rows as u32).collect();
    let root_total = b.totals(&root_rows);
    let mut finish = |nodes: &mut Vec<TreeNode<T>>, b: &Builder<'_, T>, leaf: Pending<T>| {
        let value = b.leaf_value(leaf.total, lr);
        nodes[leaf.node] = TreeNode::Leaf { value };
        for &r in &leaf.rows {
            row_value[r as usize] = value;
        }
    };
    let split_node =
        |nodes: &mut Vec<TreeNode<T>>, b: &Builder<'_, T>, at: &Pending<T>, s: SplitChoice<T>| {
            let (lrows, rrows) = b.partition(&at.rows, &s);
            let left = nodes.len();
            nodes.push(TreeNode::Leaf { value: T::zero() });
            nodes.push(TreeNode::Leaf { value: T::zero() });
            let threshold = if s.bin == 0 {
                T::zero()
            } else {
                b.binned.uppers[s.feature][s.bin as usize - 1]
            };
            nodes[at.node] = TreeNode::Split {
                feature: s.feature as u32,
                threshold,
                left: left as u32,
                right: left as u32 + 1,
            };
            let (lt, rt) = (b.totals(&lrows), b.totals(&rrows));
            [
                Pending {
                    node: left,
                    rows: lrows,
                    total: lt,
                    depth: at.depth + 1,
                    split: None,
                },
                Pending {
                    node: left + 1,
                    rows: rrows,
                    total: rt,
                    depth: at.depth + 1,
                    split: None,
                },
            ]
        };
    let root = Pending {
        node: 0,
        rows: root_rows,
        total: root_total,
        depth: 0,
        split: None,
    };
    match p.growth {
        Growth::LevelWise { max_depth } => {
            let mut level = vec![root];
            while !level.is_empty() {
                let mut next = Vec::new();
                for node in level {
                    let choice = if node.depth < max_depth {
                        b.best_split(&node.rows, node.total)
                    } else {
                        None
                    };
                    match choice {
                        Some(s) => next.extend(split_node(&mut nodes, b, &node, s)),
                        None => finish(&mut nodes, b, node),
                    }
                }
                level = next;
            }
        }
        Growth::LeafWise { max_leaves } => {
            let mut open = vec![root];
            let first = b.best_split(&open[0].rows, open[0].total);
            open[0].split = first;
            let mut leaves = 1;
            while leaves < max_leaves {
                let pick = open
                    .iter()
                    .enumerate()
                    .filter_map(|(i, n)| n.split.map(|s| (i, s.gain, n.node)))
                    .fold(None::<(usize, T, usize)>, |acc, cand| match acc {
                        Some(a) if cand.1 < a.1 || (cand.1 == a.1 && cand.2 > a.2) => Some(a),
                        _ => Some(cand),
                    });
                let Some((i, _, _)) = pick else { break };
                let node = open.swap_remove(i);
                let s = node.split.expect("picked nodes have a split");
                for mut child in split_node(&mut nodes, b, &node, s) {
                    child.split = b.best_split(&child.rows, child.total);
                    open.push(child);
                }
                leaves += 1;
            }
            open.sort_by_key(|n| n.node);
            for node in open {
                finish(&mut nodes, b, node);
            }
        }
    }
    (Tree { nodes }, row_value)
}

fn sigmoid<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

pub(super) fn fit<T: Real>(p: &GbdtParams, x: &FeatureMatrix<T>, y: &[Label]) -> GbdtModel<T> {
    let n = y.len();
    let spam = y.iter().filter(|l| l.is_spam()).count();
    let prior = T::of_usize(spam) / T::of_usize(n);
    let base_margin = (prior / (T::one() - prior)).ln();
    let targets: Vec<T> = y
        .iter()
        .map(|l| if l.is_spam() { T::one() } else { T::zero() })
        .collect();
    let binned = bin_features(x, p.max_bins);
    let mut margins = vec![base_margin; n];
    let mut grad = vec![T::zero(); n];
    let mut hess = vec![T::zero(); n];
    let mut trees = Vec::with_capacity(p.n_estimators);
    for _ in 0..p.n_estimators {
        for i in 0..n {
            let prob = sigmoid(margins[i]);
            grad[i] = prob - targets[i];
            hess[i] = (prob * (T::one() - prob)).max(T::of(1e-16));
        }
        let mut builder = Builder {
            binned: &binned,
            grad: &grad,
            hess: &hess,
            lambda: T::of(p.lambda),
            min_child_weight: T::of(p.min_child_weight),
            min_data: p.min_data_in_leaf,
            hist: vec![Stat::default(); binned.total_bins],
            touched: vec![false; x.n_features],
        };
        let (tree, delta) = grow_tree(&mut builder, p, n);
        margins
            .iter_mut()
            .zip(&delta)
            .for_each(|(m, &d)| *m = *m + d);
        trees.push(tree);
    }
    GbdtModel { base_margin, trees }
}
