//! Shared fixtures, oracles and published reference values for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spambench::{Label, LabeledMessage, Source, TokenizedDoc};

pub mod criteria;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Model order of the published few-shot table.
pub const TABLE4_MODELS: [&str; 9] = [
    "NB", "LR", "KNN", "SVM", "XGBoost", "LightGBM", "RoBERTa", "SetFit", "Spam-T5",
];

/// Published macro F1 per model at k = 4, 8, 16, 32, 64, 128, 256, Full.
pub const TABLE4: [[f64; 8]; 9] = [
    [0.145, 0.210, 0.211, 0.243, 0.361, 0.505, 0.663, 0.930],
    [0.153, 0.195, 0.210, 0.248, 0.353, 0.420, 0.599, 0.927],
    [0.516, 0.523, 0.596, 0.591, 0.603, 0.688, 0.733, 0.887],
    [0.155, 0.267, 0.288, 0.334, 0.531, 0.732, 0.858, 0.952],
    [0.000, 0.079, 0.351, 0.431, 0.600, 0.666, 0.767, 0.877],
    [0.000, 0.000, 0.000, 0.000, 0.455, 0.608, 0.703, 0.948],
    [0.241, 0.174, 0.575, 0.738, 0.459, 0.915, 0.929, 0.970],
    [0.215, 0.339, 0.557, 0.855, 0.887, 0.929, 0.941, 0.967],
    [0.544, 0.534, 0.619, 0.726, 0.806, 0.864, 0.933, 0.974],
];

/// Published mean and standard deviation of each few-shot row.
pub const TABLE5: [(f64, f64); 9] = [
    (0.4085, 0.2734),
    (0.3880, 0.2621),
    (0.6421, 0.1234),
    (0.5146, 0.3005),
    (0.4716, 0.3159),
    (0.3392, 0.3871),
    (0.6253, 0.3139),
    (0.7112, 0.2990),
    (0.7498, 0.1718),
];

/// Published full-train F1 of the six baselines on Ling, SMS, SpamAssassin, Enron.
pub const TABLE3_BASELINE_F1: [(&str, [f64; 4]); 6] = [
    ("nb", [1.00, 0.89, 0.87, 0.96]),
    ("lr", [0.98, 0.87, 0.92, 0.97]),
    ("knn", [0.93, 0.81, 0.92, 0.91]),
    ("svm", [1.00, 0.90, 0.94, 0.98]),
    ("xgb_like", [0.92, 0.78, 0.94, 0.91]),
    ("lgbm_like", [0.95, 0.87, 0.98, 0.98]),
];

/// Published raw corpus sizes: (total, spam) where stated.
pub const CORPUS_SIZES: [(Source, usize, Option<usize>); 4] = [
    (Source::Ling, 2893, Some(481)),
    (Source::Sms, 5574, None),
    (Source::SpamAssassin, 6047, None),
    (Source::Enron, 33716, Some(17171)),
];

/// Stated approximate spam rates after cleaning.
pub const SPAM_RATES: [(Source, f64); 4] = [
    (Source::Ling, 0.16),
    (Source::Sms, 0.13),
    (Source::SpamAssassin, 0.31),
    (Source::Enron, 0.49),
];

/// Root of the public corpora, one subdirectory per source name.
pub fn data_root() -> Option<PathBuf> {
    std::env::var_os("SPAMBENCH_DATA")
        .map(PathBuf::from)
        .filter(|p| p.is_dir())
}

pub fn source_dir(root: &Path, source: Source) -> PathBuf {
    root.join(source.name())
}

/// Brute-force dense tf-idf: vocabulary by descending document frequency
/// (ties lexicographic), raw counts times ln(N / df), optional unit length.
pub fn dense_tfidf(
    train: &[Vec<String>],
    max_features: usize,
    rows: &[Vec<String>],
    l2: bool,
) -> (Vec<String>, Vec<Vec<f64>>) {
    let n = train.len() as f64;
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in train {
        let mut seen: Vec<&str> = doc.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut terms: Vec<(&str, usize)> = df.into_iter().collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    terms.truncate(max_features);
    let matrix = rows
        .iter()
        .map(|doc| {
            let mut v: Vec<f64> = terms
                .iter()
                .map(|&(t, d)| {
                    let tf = doc.iter().filter(|x| x.as_str() == t).count() as f64;
                    tf * (n / d as f64).ln()
                })
                .collect();
            if l2 {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    v.iter_mut().for_each(|x| *x /= norm);
                }
            }
            v
        })
        .collect();
    (
        terms.into_iter().map(|(t, _)| t.to_string()).collect(),
        matrix,
    )
}

/// A random corpus of at most 10 documents over at most 15 distinct terms,
/// with at least one non-empty document.
pub fn random_corpus(r: &mut ChaCha8Rng) -> Vec<TokenizedDoc> {
    let n_terms = r.gen_range(1..=15);
    let n_docs = r.gen_range(1..=10);
    let mut docs: Vec<TokenizedDoc> = (0..n_docs)
        .map(|d| TokenizedDoc {
            doc_id: format!("d{d}"),
            tokens: (0..r.gen_range(0..=12))
                .map(|_| format!("t{}", r.gen_range(0..n_terms)))
                .collect(),
        })
        .collect();
    if docs.iter().all(|d| d.tokens.is_empty()) {
        docs[0].tokens.push("t0".into());
    }
    docs
}

const SPAM_WORDS: [&str; 16] = [
    "winner",
    "cash",
    "prize",
    "free",
    "claim",
    "urgent",
    "offer",
    "credit",
    "reward",
    "bonus",
    "viagra",
    "lottery",
    "discount",
    "guaranteed",
    "click",
    "unsubscribe",
];
const HAM_WORDS: [&str; 16] = [
    "meeting", "lunch", "tomorrow", "project", "report", "family", "weekend", "dinner", "schedule",
    "thanks", "review", "draft", "office", "garden", "football", "holiday",
];
const SHARED_WORDS: [&str; 12] = [
    "today", "please", "call", "message", "time", "week", "number", "good", "new", "people",
    "home", "work",
];

/// Labeled messages with a controllable class signal: each content word is
/// drawn from the message's own class list with probability `signal`.
pub fn synthetic_messages(n: usize, spam_rate: f64, signal: f64, seed: u64) -> Vec<LabeledMessage> {
    let mut r = rng(seed);
    let n_spam = ((n as f64) * spam_rate).round() as usize;
    let mut labels: Vec<Label> = (0..n)
        .map(|i| if i < n_spam { Label::Spam } else { Label::Ham })
        .collect();
    labels.shuffle(&mut r);
    labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let (own, other) = match label {
                Label::Spam => (&SPAM_WORDS, &HAM_WORDS),
                Label::Ham => (&HAM_WORDS, &SPAM_WORDS),
            };
            let len = r.gen_range(5..15);
            let words: Vec<String> = (0..len)
                .map(|_| {
                    let roll: f64 = r.gen();
                    if roll < 0.3 {
                        SHARED_WORDS.choose(&mut r).unwrap().to_string()
                    } else if r.gen::<f64>() < signal {
                        own.choose(&mut r).unwrap().to_string()
                    } else {
                        other.choose(&mut r).unwrap().to_string()
                    }
                })
                .collect();
            LabeledMessage {
                id: format!("syn-{i:05}"),
                text: words.join(" "),
                label,
                source: Source::Sms,
            }
        })
        .collect()
}

/// Mean of seed-level values keyed by anything ordered.
pub fn mean_by<K: Ord + Clone>(values: impl IntoIterator<Item = (K, f64)>) -> BTreeMap<K, f64> {
    let mut acc: BTreeMap<K, (f64, usize)> = BTreeMap::new();
    for (k, v) in values {
        let e = acc.entry(k).or_default();
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(k, (s, n))| (k, s / n as f64))
        .collect()
}
