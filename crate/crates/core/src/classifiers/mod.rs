//! The six baseline classifiers behind one fit/predict interface.
//!
//! Score conventions: every model exposes a real-valued score and predicts
//! spam iff the score is strictly above its threshold, so exact ties fall to
//! ham. Naive Bayes (posterior log-odds), SVM (decision value) and the boosted
//! trees (raw margin) use threshold 0; logistic regression (probability) and
//! KNN (neighbour label) use 0.5.

mod gbdt;
mod index;
mod knn;
mod lr;
mod nb;
mod svm;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::scalar::Real;

pub use gbdt::{GbdtModel, GbdtParams, Growth, Tree, TreeNode};
pub use knn::{KnnModel, KnnParams};
pub use lr::{logistic_objective, LrModel, LrParams};
pub use nb::{NbModel, NbParams};
pub use svm::{SvmModel, SvmParams};

const MODEL_FORMAT: &str = "spambench-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Nb,
    Lr,
    Knn,
    Svm,
    XgbLike,
    LgbmLike,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Nb,
        Algorithm::Lr,
        Algorithm::Knn,
        Algorithm::Svm,
        Algorithm::XgbLike,
        Algorithm::LgbmLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nb => "nb",
            Algorithm::Lr => "lr",
            Algorithm::Knn => "knn",
            Algorithm::Svm => "svm",
            Algorithm::XgbLike => "xgb_like",
            Algorithm::LgbmLike => "lgbm_like",
        }
    }

    /// Display name used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Nb => "NB",
            Algorithm::Lr => "LR",
            Algorithm::Knn => "KNN",
            Algorithm::Svm => "SVM",
            Algorithm::XgbLike => "XGBoost",
            Algorithm::LgbmLike => "LightGBM",
        }
    }

    /// Tuned tf-idf budget per model on the full training sets.
    pub fn default_feature_budget(self) -> usize {
        match self {
            Algorithm::Nb => 1000,
            Algorithm::Lr => 500,
            Algorithm::Knn => 150,
            Algorithm::Svm => 3000,
            Algorithm::XgbLike => 2000,
            Algorithm::LgbmLike => 3000,
        }
    }

    fn threshold(self) -> f64 {
        match self {
            Algorithm::Lr | Algorithm::Knn => 0.5,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s || a.label().to_ascii_lowercase() == s)
            .ok_or_else(|| Error::Config(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hyperparams {
    Nb(NbParams),
    Lr(LrParams),
    Knn(KnnParams),
    Svm(SvmParams),
    Gbdt(GbdtParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub algorithm: Algorithm,
    pub params: Hyperparams,
    pub seed: u64,
}

impl ClassifierSpec {
    /// The baseline hyperparameters for an algorithm.
    pub fn baseline(algorithm: Algorithm, seed: u64) -> Self {
        let params = match algorithm {
            Algorithm::Nb => Hyperparams::Nb(NbParams::default()),
            Algorithm::Lr => Hyperparams::Lr(LrParams::default()),
            Algorithm::Knn => Hyperparams::Knn(KnnParams::default()),
            Algorithm::Svm => Hyperparams::Svm(SvmParams::default()),
            Algorithm::XgbLike => Hyperparams::Gbdt(GbdtParams::xgb_like()),
            Algorithm::LgbmLike => Hyperparams::Gbdt(GbdtParams::lgbm_like()),
        };
        ClassifierSpec {
            algorithm,
            params,
            seed,
        }
    }

    fn check(&self) -> Result<()> {
        let ok = matches!(
            (self.algorithm, &self.params),
            (Algorithm::Nb, Hyperparams::Nb(_))
                | (Algorithm::Lr, Hyperparams::Lr(_))
                | (Algorithm::Knn, Hyperparams::Knn(_))
                | (Algorithm::Svm, Hyperparams::Svm(_))
                | (
                    Algorithm::XgbLike | Algorithm::LgbmLike,
                    Hyperparams::Gbdt(_)
                )
        );
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "hyperparameters do not match algorithm {}",
                self.algorithm
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum ModelParams<T: Real> {
    Constant { label: Label },
    Nb(NbModel<T>),
    Lr(LrModel<T>),
    Knn(KnnModel<T>),
    Svm(SvmModel<T>),
    Gbdt(GbdtModel<T>),
}

/// A fitted classifier. Immutable after [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TrainedModel<T: Real> {
    pub spec: ClassifierSpec,
    pub vocab_ref: String,
    pub n_features: usize,
    pub classes_seen: Vec<Label>,
    pub parameters: ModelParams<T>,
}

fn validate_training<T: Real>(x: &FeatureMatrix<T>, y: &[Label]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "{} vectors vs {} labels",
            x.len(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::Empty("empty training set"));
    }
    for row in &x.rows {
        if row
            .entries
            .indices
            .iter()
            .any(|&i| i as usize >= x.n_features)
        {
            return Err(Error::Dimension(format!(
                "vector {} has an index outside {} features",
                row.doc_id, x.n_features
            )));
        }
    }
    Ok(())
}

pub fn fit<T: Real>(
    spec: &ClassifierSpec,
    x: &FeatureMatrix<T>,
    y: &[Label],
) -> Result<TrainedModel<T>> {
    spec.check()?;
    validate_training(x, y)?;
    let mut classes_seen: Vec<Label> = y.to_vec();
    classes_seen.sort_unstable();
    classes_seen.dedup();
    let parameters = if classes_seen.len() == 1 {
        ModelParams::Constant {
            label: classes_seen[0],
        }
    } else {
        match &spec.params {
            Hyperparams::Nb(p) => ModelParams::Nb(nb::fit(p, x, y)),
            Hyperparams::Lr(p) => ModelParams::Lr(lr::fit(p, x, y)),
            Hyperparams::Knn(p) => ModelParams::Knn(knn::fit(p, x, y)),
            Hyperparams::Svm(p) => ModelParams::Svm(svm::fit(p, x, y)),
            Hyperparams::Gbdt(p) => ModelParams::Gbdt(gbdt::fit(p, x, y)),
        }
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        vocab_ref: x.vocab_id.clone(),
        n_features: x.n_features,
        classes_seen,
        parameters,
    })
}

impl<T: Real> TrainedModel<T> {
    pub fn threshold(&self) -> T {
        T::of(self.spec.algorithm.threshold())
    }

    fn check_input(&self, x: &FeatureMatrix<T>) -> Result<()> {
        if x.vocab_id != self.vocab_ref || x.n_features != self.n_features {
            return Err(Error::VocabularyMismatch {
                expected: self.vocab_ref.clone(),
                found: x.vocab_id.clone(),
            });
        }
        Ok(())
    }

    fn constant_score(&self, label: Label) -> T {
        let t = self.threshold();
        match label {
            Label::Spam => t + T::one(),
            Label::Ham => t - T::one(),
        }
    }

    pub fn label_for(&self, score: T) -> Label {
        if score > self.threshold() {
            Label::Spam
        } else {
            Label::Ham
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let doc = serde_json::json!({
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "model": self,
        });
        let text = serde_json::to_string(&doc)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Envelope<M> {
            format: String,
            version: u32,
            model: M,
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let env: Envelope<serde_json::Value> = serde_json::from_str(&text)?;
        if env.format != MODEL_FORMAT {
            return Err(Error::Validation(format!(
                "{} is not a model file",
                path.display()
            )));
        }
        if env.version != MODEL_VERSION {
            return Err(Error::ModelVersion(env.version));
        }
        Ok(serde_json::from_value(env.model)?)
    }
}

pub fn predict_score<T: Real>(model: &TrainedModel<T>, x: &FeatureMatrix<T>) -> Result<Vec<T>> {
    model.check_input(x)?;
    Ok(match &model.parameters {
        ModelParams::Constant { label } => vec![model.constant_score(*label); x.len()],
        ModelParams::Nb(m) => m.scores(x),
        ModelParams::Lr(m) => m.scores(x),
        ModelParams::Knn(m) => m.scores(x),
        ModelParams::Svm(m) => m.scores(x),
        ModelParams::Gbdt(m) => m.scores(x),
    })
}

pub fn predict<T: Real>(model: &TrainedModel<T>, x: &FeatureMatrix<T>) -> Result<Vec<Label>> {
    Ok(predict_score(model, x)?
        .into_iter()
        .map(|s| model.label_for(s))
        .collect())
}
