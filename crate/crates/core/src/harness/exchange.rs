//! File exchange with model runners that live outside this process.
//!
//! An export directory holds three files:
//!
//! * `train.jsonl`, one `{"id", "text", "label"}` record per few-shot training message;
//! * `test.jsonl`, one `{"id", "text"}` record per test message (labels withheld);
//! * `split.json`, the [`SplitRef`] that reproduces both sides from the canonical corpus.
//!
//! A runner answers with a predictions file (`{"id", "predicted", "score"?}` per
//! line) and a timing file (`{"train_time_s", "infer_time_s", ...}`), which
//! [`score_predictions`] turns into a [`RunResult`].

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{labels_of, Label, LabeledMessage};
use crate::error::{Error, Result};
use crate::harness::results::{RunResult, Status};
use crate::metrics::score;
use crate::protocol::{sample_few_shot, split, FewShotSample, ShotCount, Split, SplitSpec};

pub const TRAIN_FILE: &str = "train.jsonl";
pub const TEST_FILE: &str = "test.jsonl";
pub const MANIFEST_FILE: &str = "split.json";

/// Everything needed to recompute a cell's train sample and test side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRef {
    pub dataset: String,
    pub k: ShotCount,
    pub seed: u64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_train_fraction() -> f64 {
    0.8
}

impl SplitRef {
    pub fn new(dataset: impl Into<String>, k: ShotCount, seed: u64) -> Self {
        SplitRef {
            dataset: dataset.into(),
            k,
            seed,
            train_fraction: default_train_fraction(),
        }
    }

    /// The split and few-shot draw this reference denotes over `labels`.
    ///
    /// The run matrix uses the same function, so exported files and
    /// in-process cells always agree.
    pub fn resolve(&self, labels: &[Label]) -> Result<(Split, FewShotSample)> {
        let spec = SplitSpec {
            train_fraction: self.train_fraction,
            ..SplitSpec::new(self.seed)
        };
        let split = split(labels, &spec)?;
        let sample = sample_few_shot(&split.train, labels, self.k, self.seed)?;
        Ok((split, sample))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            detail: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub id: String,
    pub text: String,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestRecord {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub predicted: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

/// Wall-clock seconds reported by a runner. Extra fields are kept verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub train_time_s: f64,
    pub infer_time_s: f64,
    #[serde(flatten)]
    pub extras: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportPaths {
    pub train: PathBuf,
    pub test: PathBuf,
    pub manifest: PathBuf,
}

fn write_jsonl<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, &r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read line-delimited JSON, reporting the 1-based line of the first bad record.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            detail: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Write the train sample, the label-free test side and the manifest for one cell.
pub fn export_splits(
    messages: &[LabeledMessage],
    split_ref: &SplitRef,
    out_dir: &Path,
) -> Result<ExportPaths> {
    let labels = labels_of(messages);
    let (split, sample) = split_ref.resolve(&labels)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let paths = ExportPaths {
        train: out_dir.join(TRAIN_FILE),
        test: out_dir.join(TEST_FILE),
        manifest: out_dir.join(MANIFEST_FILE),
    };
    write_jsonl(
        &paths.train,
        sample.indices.iter().map(|&i| TrainRecord {
            id: messages[i].id.clone(),
            text: messages[i].text.clone(),
            label: messages[i].label,
        }),
    )?;
    write_jsonl(
        &paths.test,
        split.test.iter().map(|&i| TestRecord {
            id: messages[i].id.clone(),
            text: messages[i].text.clone(),
        }),
    )?;
    let manifest = serde_json::to_string_pretty(split_ref)?;
    std::fs::write(&paths.manifest, manifest + "\n").map_err(|e| Error::io(&paths.manifest, e))?;
    Ok(paths)
}

pub fn write_predictions(path: &Path, records: &[PredictionRecord]) -> Result<()> {
    write_jsonl(path, records)
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    read_jsonl(path)
}

pub fn write_timing(path: &Path, timing: &Timing) -> Result<()> {
    let text = serde_json::to_string_pretty(timing)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_timing(path: &Path) -> Result<Timing> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let timing: Timing = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        detail: e.to_string(),
    })?;
    for (name, v) in [
        ("train_time_s", timing.train_time_s),
        ("infer_time_s", timing.infer_time_s),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Validation(format!(
                "{name} = {v} is not a nonnegative duration"
            )));
        }
    }
    Ok(timing)
}

/// Match predictions to the expected test ids, in test order.
///
/// Every test id must appear exactly once and no other id may appear.
pub fn align_predictions(
    test_ids: &[&str],
    predictions: &[PredictionRecord],
) -> Result<Vec<Label>> {
    let mut by_id: HashMap<&str, Label> = HashMap::with_capacity(predictions.len());
    let mut duplicates = Vec::new();
    for p in predictions {
        if by_id.insert(p.id.as_str(), p.predicted).is_some() {
            duplicates.push(p.id.as_str());
        }
    }
    let expected: std::collections::HashSet<&str> = test_ids.iter().copied().collect();
    let missing: Vec<&str> = test_ids
        .iter()
        .copied()
        .filter(|id| !by_id.contains_key(id))
        .collect();
    let mut unknown: Vec<&str> = by_id
        .keys()
        .copied()
        .filter(|id| !expected.contains(id))
        .collect();
    unknown.sort_unstable();
    duplicates.sort_unstable();
    duplicates.dedup();
    if !(missing.is_empty() && duplicates.is_empty() && unknown.is_empty()) {
        let mut parts = Vec::new();
        for (what, ids) in [
            ("missing", &missing),
            ("duplicate", &duplicates),
            ("unknown", &unknown),
        ] {
            if !ids.is_empty() {
                parts.push(format!("{} {} id(s): {}", ids.len(), what, abbreviate(ids)));
            }
        }
        return Err(Error::Validation(parts.join("; ")));
    }
    Ok(test_ids.iter().map(|id| by_id[id]).collect())
}

fn abbreviate(ids: &[&str]) -> String {
    const SHOWN: usize = 20;
    let mut s = ids
        .iter()
        .take(SHOWN)
        .copied()
        .collect::<Vec<_>>()
        .join(", ");
    if ids.len() > SHOWN {
        s.push_str(&format!(", ... ({} more)", ids.len() - SHOWN));
    }
    s
}

/// Score an external runner's predictions against the test side of `split_ref`.
pub fn score_predictions(
    messages: &[LabeledMessage],
    split_ref: &SplitRef,
    predictions: &Path,
    timing: &Path,
    model: &str,
) -> Result<RunResult> {
    let labels = labels_of(messages);
    let (split, _) = split_ref.resolve(&labels)?;
    let records = read_predictions(predictions)?;
    let timing = read_timing(timing)?;
    let test_ids: Vec<&str> = split
        .test
        .iter()
        .map(|&i| messages[i].id.as_str())
        .collect();
    let predicted = align_predictions(&test_ids, &records)?;
    let truth: Vec<Label> = split.test.iter().map(|&i| labels[i]).collect();
    let (_, metrics) = score(&truth, &predicted)?;
    Ok(RunResult {
        model: model.to_string(),
        dataset: split_ref.dataset.clone(),
        k: split_ref.k,
        seed: split_ref.seed,
        metrics: metrics.with_times(timing.train_time_s, timing.infer_time_s),
        status: Status::Ok,
        notes: String::new(),
        feature_budget: None,
    })
}
