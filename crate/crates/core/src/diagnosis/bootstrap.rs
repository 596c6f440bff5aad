use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    check_labels, has_both_classes, select_features, DiagnosisError, MetricDataset, SelectionConfig, SloState,
};

/// Fraction of `b` bootstrap resamples in which feature selection keeps each metric.
///
/// Resampled epochs keep their timestamps, so the time-contiguous folds inside
/// selection still follow time. A resample that lacks one of the classes
/// selects nothing.
pub fn bootstrap_feature_confidence(
    dataset: &MetricDataset,
    labels: &[SloState],
    config: &SelectionConfig,
    b: usize,
    seed: u64,
) -> Result<Vec<f64>, DiagnosisError> {
    check_labels(dataset, labels)?;
    if b == 0 {
        return Err(DiagnosisError::InvalidConfig("resample count must be at least 1".into()));
    }
    if !has_both_classes(labels) {
        return Err(DiagnosisError::NeedBothClasses);
    }
    let n = dataset.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = vec![0usize; dataset.n_metrics()];
    for _ in 0..b {
        let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        idx.sort_unstable();
        let resampled_labels: Vec<SloState> = idx.iter().map(|&i| labels[i]).collect();
        if !has_both_classes(&resampled_labels) {
            continue;
        }
        for f in select_features(&dataset.select(&idx), &resampled_labels, config)? {
            hits[f] += 1;
        }
    }
    Ok(hits.into_iter().map(|h| h as f64 / b as f64).collect())
}
