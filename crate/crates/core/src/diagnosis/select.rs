use serde::{Deserialize, Serialize};

use super::model::Gaussian;
use super::{check_labels, compare_correctness, has_both_classes, Better, DiagnosisError, MetricDataset, SloState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Significance level a new feature must clear (McNemar, held-out predictions).
    pub alpha: f64,
    pub max_features: usize,
    pub folds: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self { alpha: 0.05, max_features: 10, folds: 5 }
    }
}

/// Held-out naive Bayes scores under contiguous-in-time cross-validation.
///
/// Naive Bayes log-odds decompose over features, so each feature's held-out
/// contribution is computed once and candidate sets are scored by summation.
struct CvCache {
    prior: Vec<f64>,
    contrib: Vec<Vec<f64>>,
    labels: Vec<SloState>,
}

impl CvCache {
    fn build(dataset: &MetricDataset, labels: &[SloState], order: &[usize], folds: usize) -> Self {
        let n = order.len();
        let k = dataset.n_metrics();
        let folds = folds.min(n).max(1);
        let fold_of = |pos: usize| pos * folds / n;
        let mut prior = vec![0.0; n];
        let mut contrib = vec![vec![0.0; n]; k];
        for fold in 0..folds {
            let (held, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&pos| fold_of(pos) == fold);
            let n_viol = train.iter().filter(|&&p| labels[order[p]].is_violation()).count();
            let n_comp = train.len() - n_viol;
            let lo = (n_viol as f64).ln() - (n_comp as f64).ln();
            for &p in &held {
                prior[p] = if train.is_empty() { 0.0 } else { lo };
            }
            if n_viol == 0 || n_comp == 0 {
                // Degenerate fold: the prior alone decides, features contribute nothing.
                continue;
            }
            for (f, column) in contrib.iter_mut().enumerate() {
                let values = |class: SloState| {
                    train.iter().filter(move |&&p| labels[order[p]] == class).map(move |&p| dataset.rows[order[p]][f])
                };
                let gv = Gaussian::fit(values(SloState::Violation));
                let gc = Gaussian::fit(values(SloState::Compliant));
                for &p in &held {
                    let x = dataset.rows[order[p]][f];
                    column[p] = gv.ln_pdf(x) - gc.ln_pdf(x);
                }
            }
        }
        Self { prior, contrib, labels: order.iter().map(|&i| labels[i]).collect() }
    }

    fn correctness(&self, scores: &[f64]) -> Vec<bool> {
        scores.iter().zip(&self.labels).map(|(&s, &l)| (s > 0.0) == l.is_violation()).collect()
    }
}

/// Greedy forward selection.
///
/// Each round adds the feature with the best cross-validated accuracy (ties go
/// to the lowest index). The first feature is always taken; later ones only if
/// the held-out predictions improve significantly under McNemar's test.
pub fn select_features(
    dataset: &MetricDataset,
    labels: &[SloState],
    config: &SelectionConfig,
) -> Result<Vec<usize>, DiagnosisError> {
    check_labels(dataset, labels)?;
    if config.max_features == 0 {
        return Err(DiagnosisError::InvalidConfig("max_features must be at least 1".into()));
    }
    if config.folds < 2 {
        return Err(DiagnosisError::InvalidConfig("need at least 2 folds".into()));
    }
    if dataset.n_metrics() == 0 {
        return Err(DiagnosisError::EmptyFeatureSet);
    }
    if !has_both_classes(labels) {
        return Err(DiagnosisError::NeedBothClasses);
    }

    // Folds follow time, not row order.
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.sort_by(|&a, &b| dataset.timestamps[a].total_cmp(&dataset.timestamps[b]).then(a.cmp(&b)));
    let cache = CvCache::build(dataset, labels, &order, config.folds);

    let mut selected: Vec<usize> = Vec::new();
    let mut scores = cache.prior.clone();
    let mut correct = cache.correctness(&scores);
    while selected.len() < config.max_features.min(dataset.n_metrics()) {
        let mut best: Option<(usize, usize, Vec<f64>)> = None;
        for f in (0..dataset.n_metrics()).filter(|f| !selected.contains(f)) {
            let candidate: Vec<f64> = scores.iter().zip(&cache.contrib[f]).map(|(s, c)| s + c).collect();
            let hits = cache.correctness(&candidate).iter().filter(|&&c| c).count();
            if best.as_ref().is_none_or(|(_, h, _)| hits > *h) {
                best = Some((f, hits, candidate));
            }
        }
        let Some((f, _, candidate)) = best else { break };
        let candidate_correct = cache.correctness(&candidate);
        if !selected.is_empty() {
            let cmp = compare_correctness(&correct, &candidate_correct, config.alpha)?;
            if !(cmp.significant && cmp.better == Better::B) {
                break;
            }
        }
        selected.push(f);
        scores = candidate;
        correct = candidate_correct;
    }
    selected.sort_unstable();
    Ok(selected)
}
