//! Experiment configuration, read from TOML.
//!
//! ```toml
//! models = ["nb", "lr", "knn", "svm", "xgb_like", "lgbm_like", { external = "Spam-T5" }]
//! k_values = [4, 8, 16, 32, 64, 128, 256, "full"]
//! seeds = [0, 1, 2, 3, 4]
//!
//! [[datasets]]
//! name = "sms"
//! corpus = "data/sms.canonical.jsonl"
//!
//! [output]
//! results = "out/results.jsonl"
//! ```
//!
//! Omitted keys take the defaults of [`ExperimentConfig::default`].

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{Algorithm, ClassifierSpec};
use crate::corpus::Source;
use crate::error::{Error, Result};
use crate::protocol::{ShotCount, DEFAULT_FEATURE_GRID};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: Source,
    /// Canonical corpus file.
    pub corpus: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelEntry {
    /// Baseline with its standard hyperparameters, by algorithm name.
    Baseline(String),
    /// Baseline with explicit hyperparameters.
    Custom { name: String, spec: ClassifierSpec },
    /// A model trained and evaluated outside this process.
    External { external: String },
}

/// A resolved model reference.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelRef {
    InProcess { name: String, spec: ClassifierSpec },
    External { name: String },
}

impl ModelRef {
    pub fn name(&self) -> &str {
        match self {
            ModelRef::InProcess { name, .. } | ModelRef::External { name } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub results: PathBuf,
    /// Where exchange-format splits for external models are written.
    #[serde(default)]
    pub exports: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetEntry>,
    pub models: Vec<ModelEntry>,
    pub k_values: Vec<ShotCount>,
    pub seeds: Vec<u64>,
    pub feature_grid: Vec<usize>,
    /// Cross-validate the feature budget on full-train cells.
    pub tune_full_train: bool,
    pub n_folds: usize,
    pub train_fraction: f64,
    pub l2_normalize: bool,
    /// Run each cell single-threaded so timings are comparable.
    pub isolate_timing: bool,
    pub output: OutputPaths,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            datasets: Vec::new(),
            models: Algorithm::ALL
                .iter()
                .map(|a| ModelEntry::Baseline(a.name().to_string()))
                .collect(),
            k_values: ShotCount::DEFAULT_GRID.to_vec(),
            seeds: (0..5).collect(),
            feature_grid: DEFAULT_FEATURE_GRID.to_vec(),
            tune_full_train: true,
            n_folds: 5,
            train_fraction: 0.8,
            l2_normalize: true,
            isolate_timing: true,
            output: OutputPaths {
                results: PathBuf::from("results.jsonl"),
                exports: None,
            },
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Load a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.datasets.iter_mut().for_each(|d| rebase(&mut d.corpus));
        rebase(&mut cfg.output.results);
        if let Some(e) = cfg.output.exports.as_mut() {
            rebase(e);
        }
        Ok(cfg)
    }

    /// Resolve model entries, rejecting unknown names and duplicates.
    pub fn resolve_models(&self) -> Result<Vec<ModelRef>> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(self.models.len());
        for m in &self.models {
            let r = match m {
                ModelEntry::Baseline(name) => {
                    let algorithm: Algorithm = name.parse()?;
                    ModelRef::InProcess {
                        name: algorithm.name().to_string(),
                        spec: ClassifierSpec::baseline(algorithm, 0),
                    }
                }
                ModelEntry::Custom { name, spec } => ModelRef::InProcess {
                    name: name.clone(),
                    spec: spec.clone(),
                },
                ModelEntry::External { external } => ModelRef::External {
                    name: external.clone(),
                },
            };
            if !seen.insert(r.name().to_string()) {
                return Err(Error::Config(format!("model {} listed twice", r.name())));
            }
            out.push(r);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("no datasets".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no models".into()));
        }
        if self.k_values.is_empty() {
            return Err(Error::Config("no k values".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no seeds".into()));
        }
        if self.feature_grid.is_empty() || self.feature_grid.contains(&0) {
            return Err(Error::Config(
                "feature grid must be non-empty and positive".into(),
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config("train_fraction must lie in (0, 1)".into()));
        }
        let mut names = HashSet::new();
        for d in &self.datasets {
            if !names.insert(d.name) {
                return Err(Error::Config(format!("dataset {} listed twice", d.name)));
            }
            if !d.corpus.is_file() {
                return Err(Error::Config(format!(
                    "dataset {}: corpus file {} not found",
                    d.name,
                    d.corpus.display()
                )));
            }
        }
        self.resolve_models()?;
        Ok(())
    }
}
