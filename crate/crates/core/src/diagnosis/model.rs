use serde::{Deserialize, Serialize};

use super::{check_labels, has_both_classes, DiagnosisError, MetricDataset, SloState};

/// Lower bound on fitted variances; keeps constant metrics finite.
pub const VARIANCE_FLOOR: f64 = 1e-6;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub var: f64,
}

impl Gaussian {
    pub fn fit(values: impl Iterator<Item = f64> + Clone) -> Self {
        let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
        let mean = sum / n as f64;
        let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
        Self { mean, var: (ss / n as f64).max(VARIANCE_FLOOR) }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * (LN_2PI + self.var.ln()) - d * d / (2.0 * self.var)
    }
}

/// Gaussian naive Bayes over a subset of the metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisModel {
    pub metric_names: Vec<String>,
    /// Metric indices used as features, ascending.
    pub feature_set: Vec<usize>,
    pub prior_violation: f64,
    /// Class conditionals aligned with `feature_set`.
    pub compliant: Vec<Gaussian>,
    pub violation: Vec<Gaussian>,
}

impl DiagnosisModel {
    pub fn prior_compliant(&self) -> f64 {
        1.0 - self.prior_violation
    }

    /// `ln P(violation) - ln P(compliant)`.
    pub fn log_prior_ratio(&self) -> f64 {
        self.prior_violation.ln() - self.prior_compliant().ln()
    }

    fn attributions(&self, metrics: &[f64]) -> Result<Vec<f64>, DiagnosisError> {
        let mut out = vec![0.0; self.metric_names.len()];
        for (slot, &f) in self.feature_set.iter().enumerate() {
            let x = metrics.get(f).copied().filter(|v| v.is_finite());
            let x = x.ok_or_else(|| DiagnosisError::MissingFeature(self.metric_names[f].clone()))?;
            out[f] = self.violation[slot].ln_pdf(x) - self.compliant[slot].ln_pdf(x);
        }
        Ok(out)
    }
}

pub fn fit_classifier(
    dataset: &MetricDataset,
    labels: &[SloState],
    feature_set: &[usize],
) -> Result<DiagnosisModel, DiagnosisError> {
    check_labels(dataset, labels)?;
    if feature_set.is_empty() {
        return Err(DiagnosisError::EmptyFeatureSet);
    }
    if let Some(&bad) = feature_set.iter().find(|&&f| f >= dataset.n_metrics()) {
        return Err(DiagnosisError::BadFeature(bad));
    }
    if !has_both_classes(labels) {
        return Err(DiagnosisError::NeedBothClasses);
    }
    let mut features = feature_set.to_vec();
    features.sort_unstable();
    features.dedup();

    let n_violation = labels.iter().filter(|l| l.is_violation()).count();
    let fit_class = |class: SloState| -> Vec<Gaussian> {
        features
            .iter()
            .map(|&f| {
                Gaussian::fit(dataset.rows.iter().zip(labels).filter(move |(_, &l)| l == class).map(move |(r, _)| r[f]))
            })
            .collect()
    };
    Ok(DiagnosisModel {
        metric_names: dataset.metric_names.clone(),
        compliant: fit_class(SloState::Compliant),
        violation: fit_class(SloState::Violation),
        feature_set: features,
        prior_violation: n_violation as f64 / labels.len() as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: SloState,
    /// `ln P(violation | x) - ln P(compliant | x)`.
    pub log_odds: f64,
    /// `[P(compliant | x), P(violation | x)]`.
    pub posterior: [f64; 2],
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn classify(model: &DiagnosisModel, metrics: &[f64]) -> Result<Classification, DiagnosisError> {
    let a = model.attributions(metrics)?;
    let log_odds = model.log_prior_ratio() + a.iter().sum::<f64>();
    Ok(classification_from_log_odds(log_odds))
}

pub(crate) fn classification_from_log_odds(log_odds: f64) -> Classification {
    let p_violation = sigmoid(log_odds);
    Classification {
        class: if log_odds > 0.0 { SloState::Violation } else { SloState::Compliant },
        log_odds,
        posterior: [1.0 - p_violation, p_violation],
    }
}

/// Per-metric evidence toward violation for one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    pub ts: f64,
    /// `ln p(x_i | violation) - ln p(x_i | compliant)`; zero for metrics outside the model.
    pub attributions: Vec<f64>,
    /// `attributions[i] > 0`.
    pub abnormal: Vec<bool>,
}

impl Signature {
    pub fn from_attributions(ts: f64, attributions: Vec<f64>) -> Self {
        let abnormal = attributions.iter().map(|&a| a > 0.0).collect();
        Self { ts, attributions, abnormal }
    }

    pub fn abnormal_metrics(&self) -> Vec<usize> {
        self.abnormal.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }
}

pub fn signature(model: &DiagnosisModel, metrics: &[f64], ts: f64) -> Result<Signature, DiagnosisError> {
    Ok(Signature::from_attributions(ts, model.attributions(metrics)?))
}
