//! SLO violation diagnosis from per-epoch server metrics.
//!
//! Epochs are labelled by comparing their average response time against the
//! SLO threshold. A Gaussian naive Bayes classifier maps metrics to SLO state;
//! its per-metric log-likelihood ratios form a *signature* of each violation,
//! which can then be clustered and used as a retrieval key.

mod bootstrap;
mod catalog;
mod cluster;
mod compare;
mod dataset;
mod ensemble;
mod model;
mod select;
pub mod synth;

pub use bootstrap::bootstrap_feature_confidence;
pub use catalog::{retrieve, CatalogEntry, RetrievalHit, SignatureCatalog};
pub use cluster::cluster_signatures;
pub use compare::{accuracy_significant, compare_correctness, mcnemar_exact, Better, ModelComparison};
pub use dataset::{label_slo, MetricDataset, SloConfig};
pub use ensemble::{ensemble_classify, ensemble_fit, Ensemble, EnsembleMember};
pub use model::{
    classify, fit_classifier, signature, Classification, DiagnosisModel, Gaussian, Signature, VARIANCE_FLOOR,
};
pub use select::{select_features, SelectionConfig};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosisError {
    #[error("need both classes in the training labels")]
    NeedBothClasses,
    #[error("empty feature set")]
    EmptyFeatureSet,
    #[error("feature index {0} is out of range")]
    BadFeature(usize),
    #[error("missing value for metric `{0}`")]
    MissingFeature(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty evaluation set")]
    EmptyEvalSet,
    #[error("{labels} labels for {epochs} epochs")]
    LabelMismatch { labels: usize, epochs: usize },
    #[error("need at least {k} signatures to form {k} clusters, got {n}")]
    TooFewSignatures { k: usize, n: usize },
    #[error("signature has {got} attributions, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty catalog")]
    EmptyCatalog,
    #[error("no window contains both classes")]
    NoValidWindows,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SloState {
    Compliant,
    Violation,
}

impl SloState {
    pub fn is_violation(self) -> bool {
        self == SloState::Violation
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SloState::Compliant => "compliant",
            SloState::Violation => "violation",
        }
    }
}

impl fmt::Display for SloState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub(crate) fn check_labels(dataset: &MetricDataset, labels: &[SloState]) -> Result<(), DiagnosisError> {
    if labels.len() != dataset.len() {
        return Err(DiagnosisError::LabelMismatch { labels: labels.len(), epochs: dataset.len() });
    }
    Ok(())
}

pub(crate) fn has_both_classes(labels: &[SloState]) -> bool {
    labels.iter().any(|l| l.is_violation()) && labels.iter().any(|l| !l.is_violation())
}
