//! Training vocabulary and tf-idf vectors.
//!
//! `tf` is the raw in-document count and `idf(t) = ln(N / df(t))` with `N`
//! the number of training documents, unsmoothed. Vectors are optionally
//! L2-normalized as the final step.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::textprep::TokenizedDoc;

const VOCAB_MAGIC: &str = "# spambench-vocabulary v1";

/// Terms retained from a training corpus with their document frequencies.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<usize>,
    corpus_size: usize,
    max_features: usize,
    index: HashMap<String, u32>,
    fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct VocabularyData {
    terms: Vec<String>,
    df: Vec<usize>,
    corpus_size: usize,
    max_features: usize,
}

impl From<VocabularyData> for Vocabulary {
    fn from(d: VocabularyData) -> Self {
        Vocabulary::from_parts(d.terms, d.df, d.corpus_size, d.max_features)
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData {
            terms: v.terms,
            df: v.df,
            corpus_size: v.corpus_size,
            max_features: v.max_features,
        }
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
            && self.df == other.df
            && self.corpus_size == other.corpus_size
            && self.max_features == other.max_features
    }
}

impl Vocabulary {
    fn from_parts(
        terms: Vec<String>,
        df: Vec<usize>,
        corpus_size: usize,
        max_features: usize,
    ) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let fingerprint = fingerprint(&terms, &df, corpus_size);
        Vocabulary {
            terms,
            df,
            corpus_size,
            max_features,
            index,
            fingerprint,
        }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    pub fn max_features(&self) -> usize {
        self.max_features
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn df(&self, term: &str) -> Option<usize> {
        self.index_of(term).map(|i| self.df[i as usize])
    }

    pub fn df_at(&self, index: usize) -> usize {
        self.df[index]
    }

    /// `ln(N / df)` for the term at `index`.
    pub fn idf<T: Real>(&self, index: usize) -> T {
        (T::of_usize(self.corpus_size) / T::of_usize(self.df[index])).ln()
    }

    /// Content hash identifying this vocabulary in model files.
    pub fn id(&self) -> &str {
        &self.fingerprint
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{VOCAB_MAGIC} corpus_size={} max_features={}\n",
            self.corpus_size, self.max_features
        );
        for (t, df) in self.terms.iter().zip(&self.df) {
            let _ = writeln!(s, "{t}\t{df}");
        }
        s
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, detail: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            detail,
        };
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| err(1, "missing header".into()))?;
        let rest = header
            .strip_prefix(VOCAB_MAGIC)
            .ok_or_else(|| err(1, "not a vocabulary file".into()))?;
        let mut corpus_size = None;
        let mut max_features = None;
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("corpus_size", v)) => corpus_size = v.parse::<usize>().ok(),
                Some(("max_features", v)) => max_features = v.parse::<usize>().ok(),
                _ => return Err(err(1, format!("unexpected header field {field:?}"))),
            }
        }
        let (corpus_size, max_features) = corpus_size
            .zip(max_features)
            .ok_or_else(|| err(1, "header needs corpus_size and max_features".into()))?;
        let mut terms = Vec::new();
        let mut df = Vec::new();
        for (i, line) in lines.enumerate() {
            let (t, d) = line
                .split_once('\t')
                .ok_or_else(|| err(i + 2, "expected term<TAB>df".into()))?;
            let d: usize = d.parse().map_err(|_| err(i + 2, format!("bad df {d:?}")))?;
            if d == 0 || d > corpus_size {
                return Err(err(i + 2, format!("df {d} outside 1..={corpus_size}")));
            }
            terms.push(t.to_string());
            df.push(d);
        }
        Ok(Vocabulary::from_parts(terms, df, corpus_size, max_features))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Vocabulary::from_text(&text, path)
    }
}

/// FNV-1a over the vocabulary contents.
fn fingerprint(terms: &[String], df: &[usize], n: usize) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    feed(&(n as u64).to_le_bytes());
    for (t, d) in terms.iter().zip(df) {
        feed(t.as_bytes());
        feed(&[0]);
        feed(&(*d as u64).to_le_bytes());
    }
    format!("{h:016x}")
}

/// Rank terms by document frequency (descending, ties lexicographic) and keep
/// the first `max_features`.
pub fn fit_vocabulary(docs: &[TokenizedDoc], max_features: usize) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::Empty("no training documents"));
    }
    if max_features == 0 {
        return Err(Error::Config("max_features must be at least 1".into()));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        let mut distinct: Vec<&str> = doc.tokens.iter().map(String::as_str).collect();
        distinct.sort_unstable();
        distinct.dedup();
        for t in distinct {
            *counts.entry(t).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(Error::Empty("every training document has no tokens"));
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_features);
    let (terms, df) = ranked.into_iter().map(|(t, d)| (t.to_string(), d)).unzip();
    Ok(Vocabulary::from_parts(terms, df, docs.len(), max_features))
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector<T> {
    pub indices: Vec<u32>,
    pub values: Vec<T>,
}

impl<T: Real> SparseVector<T> {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices
            .iter()
            .map(|&i| i as usize)
            .zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> T {
        match self.indices.binary_search(&(index as u32)) {
            Ok(pos) => self.values[pos],
            Err(_) => T::zero(),
        }
    }

    pub fn dot(&self, other: &Self) -> T {
        let (mut i, mut j) = (0, 0);
        let mut acc = T::zero();
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc = acc + self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Dot product against a dense vector.
    pub fn dot_dense(&self, dense: &[T]) -> T {
        self.iter().map(|(i, v)| v * dense[i]).sum()
    }

    pub fn norm_sq(&self) -> T {
        self.values.iter().map(|&v| v * v).sum()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<T> {
        let mut d = vec![T::zero(); dim];
        for (i, v) in self.iter() {
            d[i] = v;
        }
        d
    }
}

/// tf-idf representation of one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub doc_id: String,
    pub entries: SparseVector<T>,
}

/// Vectorizer options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TfidfOptions {
    pub l2_normalize: bool,
}

impl Default for TfidfOptions {
    fn default() -> Self {
        TfidfOptions { l2_normalize: true }
    }
}

pub fn transform<T: Real>(
    doc: &TokenizedDoc,
    vocab: &Vocabulary,
    opts: TfidfOptions,
) -> FeatureVector<T> {
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for t in &doc.tokens {
        if let Some(i) = vocab.index_of(t) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let mut pairs: Vec<(u32, T)> = counts
        .into_iter()
        .map(|(i, tf)| (i, T::of_usize(tf) * vocab.idf::<T>(i as usize)))
        .filter(|(_, w)| *w != T::zero())
        .collect();
    pairs.sort_unstable_by_key(|p| p.0);
    let (indices, mut values): (Vec<u32>, Vec<T>) = pairs.into_iter().unzip();
    if opts.l2_normalize {
        let norm = values.iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm > T::zero() {
            values.iter_mut().for_each(|v| *v = *v / norm);
        }
    }
    FeatureVector {
        doc_id: doc.doc_id.clone(),
        entries: SparseVector { indices, values },
    }
}

pub fn transform_corpus<T: Real>(
    docs: &[TokenizedDoc],
    vocab: &Vocabulary,
    opts: TfidfOptions,
) -> Vec<FeatureVector<T>> {
    use rayon::prelude::*;
    docs.par_iter().map(|d| transform(d, vocab, opts)).collect()
}

/// Feature vectors tagged with the vocabulary they were computed against.
#[derive(Debug, Clone)]
pub struct FeatureMatrix<T> {
    pub vocab_id: String,
    pub n_features: usize,
    pub rows: Vec<FeatureVector<T>>,
}

impl<T: Real> FeatureMatrix<T> {
    pub fn new(vocab: &Vocabulary, rows: Vec<FeatureVector<T>>) -> Self {
        FeatureMatrix {
            vocab_id: vocab.id().to_string(),
            n_features: vocab.len(),
            rows,
        }
    }

    pub fn from_docs(docs: &[TokenizedDoc], vocab: &Vocabulary, opts: TfidfOptions) -> Self {
        FeatureMatrix::new(vocab, transform_corpus(docs, vocab, opts))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &SparseVector<T> {
        &self.rows[i].entries
    }

    /// Rows at the given positions, same vocabulary.
    pub fn select(&self, idx: &[usize]) -> Self {
        FeatureMatrix {
            vocab_id: self.vocab_id.clone(),
            n_features: self.n_features,
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}
