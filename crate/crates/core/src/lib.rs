//! Spam-detection benchmark workbench.
//!
//! The pipeline runs corpus ingestion ([`corpus`]), text preparation
//! ([`textprep`]), tf-idf features ([`features`]), baseline classifiers
//! ([`classifiers`]), the split and few-shot protocol ([`protocol`]), scoring
//! ([`metrics`]) and experiment orchestration ([`harness`]).
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix it to `f64`, with `*32` variants for single precision.

pub mod classifiers;
pub mod corpus;
pub mod error;
pub mod features;
pub mod harness;
pub mod metrics;
pub mod protocol;
pub mod scalar;
pub mod textprep;

pub use classifiers::{fit, predict, predict_score, Algorithm, ClassifierSpec, Hyperparams};
pub use corpus::{ingest, Label, LabeledMessage, Source};
pub use error::{Error, Result};
pub use features::{fit_vocabulary, TfidfOptions, Vocabulary};
pub use metrics::{score, CellMetrics, ConfusionCounts};
pub use protocol::{ShotCount, SplitSpec};
pub use scalar::{Ratio, Real};
pub use textprep::{preprocess, TokenizedDoc};

pub type SparseVector = features::SparseVector<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type FeatureMatrix = features::FeatureMatrix<f64>;
pub type TrainedModel = classifiers::TrainedModel<f64>;

pub type SparseVector32 = features::SparseVector<f32>;
pub type FeatureVector32 = features::FeatureVector<f32>;
pub type FeatureMatrix32 = features::FeatureMatrix<f32>;
pub type TrainedModel32 = classifiers::TrainedModel<f32>;
