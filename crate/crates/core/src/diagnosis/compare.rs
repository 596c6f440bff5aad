use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use super::{check_labels, classify, DiagnosisError, DiagnosisModel, MetricDataset, SloState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Better {
    A,
    B,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub better: Better,
    pub significant: bool,
    pub p_value: f64,
    /// Epochs where only B was right.
    pub n01: usize,
    /// Epochs where only A was right.
    pub n10: usize,
}

/// Exact two-sided McNemar p-value from the discordant counts:
/// `min(1, 2 P(X <= min(n01, n10)))` with `X ~ Binomial(n01 + n10, 1/2)`.
pub fn mcnemar_exact(n01: usize, n10: usize) -> f64 {
    let n = (n01 + n10) as u64;
    if n == 0 {
        return 1.0;
    }
    let k = n01.min(n10) as u64;
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let tail: f64 = (0..=k).map(|i| (ln_binomial(n, i) + ln_half_n).exp()).sum();
    (2.0 * tail).min(1.0)
}

/// Compares two per-epoch correctness vectors on the same evaluation set.
pub fn compare_correctness(
    correct_a: &[bool],
    correct_b: &[bool],
    alpha: f64,
) -> Result<ModelComparison, DiagnosisError> {
    if correct_a.is_empty() {
        return Err(DiagnosisError::EmptyEvalSet);
    }
    if correct_a.len() != correct_b.len() {
        return Err(DiagnosisError::InvalidConfig("correctness vectors differ in length".into()));
    }
    let n01 = correct_a.iter().zip(correct_b).filter(|(&a, &b)| !a && b).count();
    let n10 = correct_a.iter().zip(correct_b).filter(|(&a, &b)| a && !b).count();
    let p_value = mcnemar_exact(n01, n10);
    let better = match n10.cmp(&n01) {
        std::cmp::Ordering::Greater => Better::A,
        std::cmp::Ordering::Less => Better::B,
        std::cmp::Ordering::Equal => Better::Tie,
    };
    Ok(ModelComparison { better, significant: p_value <= alpha, p_value, n01, n10 })
}

/// Whether two models differ significantly in accuracy on the same labelled data.
pub fn accuracy_significant(
    model_a: &DiagnosisModel,
    model_b: &DiagnosisModel,
    dataset: &MetricDataset,
    labels: &[SloState],
    alpha: f64,
) -> Result<ModelComparison, DiagnosisError> {
    check_labels(dataset, labels)?;
    if dataset.is_empty() {
        return Err(DiagnosisError::EmptyEvalSet);
    }
    let correct = |m: &DiagnosisModel| -> Result<Vec<bool>, DiagnosisError> {
        dataset.rows.iter().zip(labels).map(|(r, &l)| Ok(classify(m, r)?.class == l)).collect()
    };
    compare_correctness(&correct(model_a)?, &correct(model_b)?, alpha)
}
