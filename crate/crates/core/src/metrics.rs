//! Precision, recall and F1 with spam as the positive class, plus the
//! aggregation used by the result tables and wall-clock timing.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::protocol::ShotCount;
use crate::scalar::{Ratio, Real};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn from_labels(y_true: &[Label], y_pred: &[Label]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::Dimension(format!(
                "{} true labels vs {} predictions",
                y_true.len(),
                y_pred.len()
            )));
        }
        if y_true.is_empty() {
            return Err(Error::Empty("nothing to score"));
        }
        let mut c = ConfusionCounts::default();
        for (&t, &p) in y_true.iter().zip(y_pred) {
            match (t, p) {
                (Label::Spam, Label::Spam) => c.tp += 1,
                (Label::Ham, Label::Spam) => c.fp += 1,
                (Label::Spam, Label::Ham) => c.fn_ += 1,
                (Label::Ham, Label::Ham) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// tp / (tp + fp), zero when nothing was predicted spam.
    pub fn precision<R: Ratio>(&self) -> R {
        ratio(self.tp, self.tp + self.fp)
    }

    /// tp / (tp + fn), zero when there is no spam.
    pub fn recall<R: Ratio>(&self) -> R {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn scores<R: Ratio>(&self) -> PrfScores<R> {
        let p: R = self.precision();
        let r: R = self.recall();
        let f1 = if p + r > R::zero() {
            (R::from_count(2) * p * r) / (p + r)
        } else {
            R::zero()
        };
        PrfScores {
            precision: p,
            recall: r,
            f1,
        }
    }
}

fn ratio<R: Ratio>(num: u64, den: u64) -> R {
    if den == 0 {
        R::zero()
    } else {
        R::from_count(num) / R::from_count(den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfScores<R> {
    pub precision: R,
    pub recall: R,
    pub f1: R,
}

/// Scores and timings of one evaluated cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub train_time_s: f64,
    pub infer_time_s: f64,
}

impl CellMetrics {
    pub fn from_counts(c: &ConfusionCounts) -> Self {
        let s = c.scores::<f64>();
        CellMetrics {
            f1: s.f1,
            precision: s.precision,
            recall: s.recall,
            train_time_s: 0.0,
            infer_time_s: 0.0,
        }
    }

    pub fn with_times(mut self, train_time_s: f64, infer_time_s: f64) -> Self {
        self.train_time_s = train_time_s;
        self.infer_time_s = infer_time_s;
        self
    }
}

pub fn score(y_true: &[Label], y_pred: &[Label]) -> Result<(ConfusionCounts, CellMetrics)> {
    let c = ConfusionCounts::from_labels(y_true, y_pred)?;
    Ok((c, CellMetrics::from_counts(&c)))
}

/// Unweighted mean over the datasets that produced a result.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroAverage {
    pub metrics: CellMetrics,
    pub included: Vec<String>,
    pub excluded: Vec<String>,
}

/// Macro-average per-dataset cells; `None` marks an excluded dataset.
pub fn macro_over_datasets<'a, I>(cells: I) -> Result<MacroAverage>
where
    I: IntoIterator<Item = (&'a str, Option<&'a CellMetrics>)>,
{
    let mut included = Vec::new();
    let mut excluded = Vec::new();
    let mut present = Vec::new();
    for (name, cell) in cells {
        match cell {
            Some(c) => {
                included.push(name.to_string());
                present.push(*c);
            }
            None => excluded.push(name.to_string()),
        }
    }
    if present.is_empty() {
        return Err(Error::Empty("no dataset cells to average"));
    }
    let n = present.len() as f64;
    let mean = |f: fn(&CellMetrics) -> f64| present.iter().map(f).sum::<f64>() / n;
    Ok(MacroAverage {
        metrics: CellMetrics {
            f1: mean(|c| c.f1),
            precision: mean(|c| c.precision),
            recall: mean(|c| c.recall),
            train_time_s: mean(|c| c.train_time_s),
            infer_time_s: mean(|c| c.infer_time_s),
        },
        included,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispersion {
    /// Divide by n.
    Population,
    /// Divide by n - 1.
    Sample,
}

pub fn mean_std<T: Real>(values: &[T], kind: Dispersion) -> Result<(T, T)> {
    if values.is_empty() {
        return Err(Error::Empty("no values"));
    }
    let n = T::of_usize(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let den = match kind {
        Dispersion::Population => n,
        Dispersion::Sample if values.len() > 1 => n - T::one(),
        Dispersion::Sample => return Ok((mean, T::zero())),
    };
    Ok((mean, (ss / den).sqrt()))
}

/// Mean and standard deviation of a model's macro F1 over the eight
/// training-set sizes. The deviation uses the n - 1 denominator, which is
/// what reproduces the published subscripts.
pub fn mean_std_over_k<T: Real>(rows: &BTreeMap<ShotCount, T>) -> Result<(T, T)> {
    let mut values = Vec::with_capacity(ShotCount::DEFAULT_GRID.len());
    for k in ShotCount::DEFAULT_GRID {
        let v = rows
            .get(&k)
            .ok_or_else(|| Error::Validation(format!("missing k = {k}")))?;
        values.push(*v);
    }
    mean_std(&values, Dispersion::Sample)
}

/// Run `action` and return its result with the elapsed wall time in seconds.
pub fn time_block<R>(action: impl FnOnce() -> R) -> (R, f64) {
    let start = Instant::now();
    let out = action();
    (out, start.elapsed().as_secs_f64())
}
