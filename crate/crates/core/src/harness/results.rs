//! Append-only results store: one JSON `RunResult` per line.

use std::collections::HashSet;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::CellMetrics;
use crate::protocol::ShotCount;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
    Excluded,
}

/// Identity of one matrix cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub model: String,
    pub dataset: String,
    pub k: ShotCount,
    pub seed: u64,
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/k={}/seed={}",
            self.model, self.dataset, self.k, self.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub model: String,
    pub dataset: String,
    pub k: ShotCount,
    pub seed: u64,
    pub metrics: CellMetrics,
    pub status: Status,
    #[serde(default)]
    pub notes: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_budget: Option<usize>,
}

impl RunResult {
    pub fn key(&self) -> CellKey {
        CellKey {
            model: self.model.clone(),
            dataset: self.dataset.clone(),
            k: self.k,
            seed: self.seed,
        }
    }

    pub fn failed(key: &CellKey, reason: impl Into<String>) -> Self {
        Self::without_metrics(key, Status::Failed, reason)
    }

    pub fn excluded(key: &CellKey, reason: impl Into<String>) -> Self {
        Self::without_metrics(key, Status::Excluded, reason)
    }

    fn without_metrics(key: &CellKey, status: Status, reason: impl Into<String>) -> Self {
        RunResult {
            model: key.model.clone(),
            dataset: key.dataset.clone(),
            k: key.k,
            seed: key.seed,
            metrics: CellMetrics::default(),
            status,
            notes: reason.into(),
            feature_budget: None,
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.status != Status::Ok && self.notes.trim().is_empty() {
            return Err(format!("{} record without a reason", self.key()));
        }
        Ok(())
    }
}

pub fn read_results(path: &Path) -> Result<Vec<RunResult>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |detail: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            detail,
        };
        let r: RunResult = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        r.validate().map_err(parse_err)?;
        out.push(r);
    }
    Ok(out)
}

/// Appends records, refusing any key that is already present.
#[derive(Debug)]
pub struct ResultsStore {
    path: PathBuf,
    keys: HashSet<CellKey>,
}

impl ResultsStore {
    pub fn open(path: &Path) -> Result<Self> {
        let keys = if path.exists() {
            read_results(path)?.iter().map(RunResult::key).collect()
        } else {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            File::create(path).map_err(|e| Error::io(path, e))?;
            HashSet::new()
        };
        Ok(ResultsStore {
            path: path.to_path_buf(),
            keys,
        })
    }

    pub fn contains(&self, key: &CellKey) -> bool {
        self.keys.contains(key)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, record: &RunResult) -> Result<()> {
        record.validate().map_err(Error::Validation)?;
        let key = record.key();
        if self.keys.contains(&key) {
            return Err(Error::Conflict(key.to_string()));
        }
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        let mut f = OpenOptions::new()
            .append(true)
            .open(&self.path)
            .map_err(|e| Error::io(&self.path, e))?;
        f.write_all(line.as_bytes())
            .map_err(|e| Error::io(&self.path, e))?;
        self.keys.insert(key);
        Ok(())
    }
}
