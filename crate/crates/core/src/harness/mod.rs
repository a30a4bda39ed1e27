//! Experiment orchestration.
//!
//! [`run_matrix`] evaluates every (dataset, model, k, seed) cell of an
//! [`ExperimentConfig`] and appends one [`RunResult`] per cell to the results
//! store. Cells for external models are exported in the exchange format
//! instead; their scores come back later through
//! [`exchange::score_predictions`].

pub mod config;
pub mod exchange;
pub mod report;
pub mod results;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;

pub use config::{DatasetEntry, ExperimentConfig, ModelEntry, ModelRef, OutputPaths};
pub use exchange::{export_splits, score_predictions, PredictionRecord, SplitRef, Timing};
pub use report::{report, report_file, Report, ReportStyle};
pub use results::{read_results, CellKey, ResultsStore, RunResult, Status};

use crate::classifiers::{fit, predict, ClassifierSpec};
use crate::corpus::{labels_of, load_canonical, Label, LabeledMessage};
use crate::error::{Error, Result};
use crate::features::{fit_vocabulary, FeatureMatrix, TfidfOptions};
use crate::metrics::{score, time_block};
use crate::protocol::{tune_feature_count, ShotCount, Split};
use crate::scalar::Real;
use crate::textprep::{preprocess, TokenizedDoc};

/// What a matrix run did.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatrixSummary {
    pub ok: usize,
    pub failed: usize,
    pub excluded: usize,
    /// Cells already present in the results store; nothing was written for them.
    pub conflicts: Vec<CellKey>,
    /// Export directories written for external models.
    pub exports: Vec<PathBuf>,
}

impl MatrixSummary {
    pub fn written(&self) -> usize {
        self.ok + self.failed + self.excluded
    }
}

/// A loaded, preprocessed corpus.
pub struct PreparedDataset {
    pub name: String,
    pub messages: Vec<LabeledMessage>,
    pub docs: Vec<TokenizedDoc>,
    pub labels: Vec<Label>,
}

impl PreparedDataset {
    pub fn new(name: impl Into<String>, messages: Vec<LabeledMessage>) -> Self {
        let docs = messages
            .par_iter()
            .map(|m| preprocess(m.id.clone(), &m.text))
            .collect();
        let labels = labels_of(&messages);
        PreparedDataset {
            name: name.into(),
            messages,
            docs,
            labels,
        }
    }

    pub fn load(name: impl Into<String>, path: &Path) -> Result<Self> {
        Ok(Self::new(name, load_canonical(path)?))
    }

    fn pick(&self, idx: &[usize]) -> (Vec<TokenizedDoc>, Vec<Label>) {
        idx.iter()
            .map(|&i| (self.docs[i].clone(), self.labels[i]))
            .unzip()
    }
}

/// Matrix settings that apply to every cell.
#[derive(Debug, Clone)]
pub struct CellSettings {
    pub tfidf: TfidfOptions,
    pub feature_grid: Vec<usize>,
    pub tune_full_train: bool,
    pub n_folds: usize,
    pub train_fraction: f64,
    pub isolate_timing: bool,
}

impl From<&ExperimentConfig> for CellSettings {
    fn from(c: &ExperimentConfig) -> Self {
        CellSettings {
            tfidf: TfidfOptions {
                l2_normalize: c.l2_normalize,
            },
            feature_grid: c.feature_grid.clone(),
            tune_full_train: c.tune_full_train,
            n_folds: c.n_folds,
            train_fraction: c.train_fraction,
            isolate_timing: c.isolate_timing,
        }
    }
}

/// Run the full matrix in `f64`.
pub fn run_matrix(config: &ExperimentConfig) -> Result<MatrixSummary> {
    run_matrix_as::<f64>(config)
}

pub fn run_matrix_as<T: Real>(config: &ExperimentConfig) -> Result<MatrixSummary> {
    config.validate()?;
    let models = config.resolve_models()?;
    let has_external = models
        .iter()
        .any(|m| matches!(m, ModelRef::External { .. }));
    if has_external && config.output.exports.is_none() {
        return Err(Error::Config("external models need output.exports".into()));
    }
    let datasets = config
        .datasets
        .iter()
        .map(|d| PreparedDataset::load(d.name.to_string(), &d.corpus))
        .collect::<Result<Vec<_>>>()?;
    let settings = CellSettings::from(config);
    let mut summary = MatrixSummary::default();

    if let (true, Some(root)) = (has_external, &config.output.exports) {
        for d in &datasets {
            for &k in &config.k_values {
                for &seed in &config.seeds {
                    let split_ref = SplitRef {
                        train_fraction: settings.train_fraction,
                        ..SplitRef::new(d.name.clone(), k, seed)
                    };
                    let dir = export_dir(root, &split_ref);
                    match export_splits(&d.messages, &split_ref, &dir) {
                        Ok(_) => summary.exports.push(dir),
                        Err(e) => log::warn!("export {}: {e}", dir.display()),
                    }
                }
            }
        }
    }

    let store = Mutex::new(ResultsStore::open(&config.output.results)?);
    let mut cells = Vec::new();
    for d in &datasets {
        for m in &models {
            let ModelRef::InProcess { name, spec } = m else {
                continue;
            };
            for &k in &config.k_values {
                for &seed in &config.seeds {
                    cells.push((d, name.as_str(), spec, k, seed));
                }
            }
        }
    }
    log::info!("{} cells to evaluate", cells.len());

    let outcomes: Vec<std::result::Result<Status, CellKey>> = cells
        .par_iter()
        .map(|&(d, name, spec, k, seed)| {
            let key = CellKey {
                model: name.to_string(),
                dataset: d.name.clone(),
                k,
                seed,
            };
            if store.lock().expect("store lock").contains(&key) {
                return Err(key);
            }
            let record = run_cell_isolated::<T>(d, &key, spec, &settings);
            log::info!("{key}: {:?} f1={:.4}", record.status, record.metrics.f1);
            let status = record.status;
            match store.lock().expect("store lock").append(&record) {
                Ok(()) => Ok(status),
                Err(Error::Conflict(_)) => Err(key),
                Err(e) => {
                    log::error!("{key}: could not record result: {e}");
                    Ok(Status::Failed)
                }
            }
        })
        .collect();

    for o in outcomes {
        match o {
            Ok(Status::Ok) => summary.ok += 1,
            Ok(Status::Failed) => summary.failed += 1,
            Ok(Status::Excluded) => summary.excluded += 1,
            Err(key) => summary.conflicts.push(key),
        }
    }
    Ok(summary)
}

/// Directory for one exported cell: `<root>/<dataset>/k=<k>/seed=<seed>`.
pub fn export_dir(root: &Path, split_ref: &SplitRef) -> PathBuf {
    root.join(&split_ref.dataset)
        .join(format!("k={}", split_ref.k))
        .join(format!("seed={}", split_ref.seed))
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

/// Run one cell, turning errors and panics into `failed` records.
pub fn run_cell_isolated<T: Real>(
    data: &PreparedDataset,
    key: &CellKey,
    spec: &ClassifierSpec,
    settings: &CellSettings,
) -> RunResult {
    match catch_unwind(AssertUnwindSafe(|| {
        run_cell::<T>(data, key, spec, settings)
    })) {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => RunResult::failed(key, e.to_string()),
        Err(p) => RunResult::failed(key, format!("panic: {}", panic_message(p.as_ref()))),
    }
}

/// Evaluate one cell: split, draw, choose a feature budget, fit and score.
///
/// Train time covers vectorizing the training sample and fitting; inference
/// time covers vectorizing the test split and predicting.
pub fn run_cell<T: Real>(
    data: &PreparedDataset,
    key: &CellKey,
    spec: &ClassifierSpec,
    settings: &CellSettings,
) -> Result<RunResult> {
    let split_ref = SplitRef {
        train_fraction: settings.train_fraction,
        ..SplitRef::new(key.dataset.clone(), key.k, key.seed)
    };
    let (split, sample) = split_ref.resolve(&data.labels)?;
    let spec = ClassifierSpec {
        seed: key.seed,
        ..spec.clone()
    };
    let budget = if key.k == ShotCount::Full && settings.tune_full_train {
        tuned_budget::<T>(data, &split, &spec, settings, key.seed)?
    } else {
        spec.algorithm.default_feature_budget()
    };

    let evaluate = || -> Result<RunResult> {
        let (train_docs, train_y) = data.pick(&sample.indices);
        let (test_docs, test_y) = data.pick(&split.test);
        let (model, train_time) = time_block(|| -> Result<_> {
            let vocab = fit_vocabulary(&train_docs, budget)?;
            let x = FeatureMatrix::<T>::from_docs(&train_docs, &vocab, settings.tfidf);
            Ok((fit(&spec, &x, &train_y)?, vocab))
        });
        let (model, vocab) = model?;
        let (pred, infer_time) = time_block(|| -> Result<_> {
            let x = FeatureMatrix::<T>::from_docs(&test_docs, &vocab, settings.tfidf);
            predict(&model, &x)
        });
        let (_, metrics) = score(&test_y, &pred?)?;
        Ok(RunResult {
            model: key.model.clone(),
            dataset: key.dataset.clone(),
            k: key.k,
            seed: key.seed,
            metrics: metrics.with_times(train_time, infer_time),
            status: Status::Ok,
            notes: String::new(),
            feature_budget: Some(budget),
        })
    };

    if settings.isolate_timing {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| Error::Config(format!("cannot build cell thread pool: {e}")))?;
        pool.install(evaluate)
    } else {
        evaluate()
    }
}

fn tuned_budget<T: Real>(
    data: &PreparedDataset,
    split: &Split,
    spec: &ClassifierSpec,
    settings: &CellSettings,
    seed: u64,
) -> Result<usize> {
    let (docs, labels) = data.pick(&split.train);
    let tuned = tune_feature_count::<T>(
        &docs,
        &labels,
        &settings.feature_grid,
        spec,
        settings.tfidf,
        settings.n_folds,
        seed,
    )?;
    log::debug!(
        "{} on {} seed {seed}: budget {} from {:?}",
        spec.algorithm,
        data.name,
        tuned.best,
        tuned.candidates
    );
    Ok(tuned.best)
}
