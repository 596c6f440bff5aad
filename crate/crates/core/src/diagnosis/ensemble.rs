use serde::{Deserialize, Serialize};

use super::{check_labels, classify, fit_classifier, DiagnosisError, DiagnosisModel, MetricDataset, SloState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    /// Epoch range `[start, end)` the member was trained on.
    pub start: usize,
    pub end: usize,
    pub model: DiagnosisModel,
}

/// One model per contiguous time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub members: Vec<EnsembleMember>,
}

/// Trains one model on every `window_length`-epoch window that holds both
/// classes. Windows with a single class are skipped.
pub fn ensemble_fit(
    dataset: &MetricDataset,
    labels: &[SloState],
    window_length: usize,
) -> Result<Ensemble, DiagnosisError> {
    check_labels(dataset, labels)?;
    if window_length < 2 {
        return Err(DiagnosisError::InvalidConfig("window_length must be at least 2".into()));
    }
    let features: Vec<usize> = (0..dataset.n_metrics()).collect();
    let mut members = Vec::new();
    let mut start = 0;
    while start < dataset.len() {
        let end = (start + window_length).min(dataset.len());
        let idx: Vec<usize> = (start..end).collect();
        if let Ok(model) = fit_classifier(&dataset.select(&idx), &labels[start..end], &features) {
            members.push(EnsembleMember { start, end, model });
        }
        start = end;
    }
    if members.is_empty() {
        return Err(DiagnosisError::NoValidWindows);
    }
    Ok(Ensemble { members })
}

impl Ensemble {
    /// Index of the member with the lowest Brier score on `recent`; ties go to
    /// the later window. With no recent epochs the latest member is used.
    pub fn select(&self, recent: &[(&[f64], SloState)]) -> Result<usize, DiagnosisError> {
        if recent.is_empty() {
            return Ok(self.members.len() - 1);
        }
        let mut best = (0, f64::INFINITY);
        for (i, m) in self.members.iter().enumerate() {
            let mut brier = 0.0;
            for &(x, y) in recent {
                let p = classify(&m.model, x)?.posterior[1];
                let target = if y.is_violation() { 1.0 } else { 0.0 };
                brier += (p - target) * (p - target);
            }
            brier /= recent.len() as f64;
            if brier <= best.1 {
                best = (i, brier);
            }
        }
        Ok(best.0)
    }
}

/// Classifies `sample` with the member that best fits the recent labelled epochs.
pub fn ensemble_classify(
    ensemble: &Ensemble,
    recent: &[(&[f64], SloState)],
    sample: &[f64],
) -> Result<SloState, DiagnosisError> {
    let member = ensemble.select(recent)?;
    Ok(classify(&ensemble.members[member].model, sample)?.class)
}
