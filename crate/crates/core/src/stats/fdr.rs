use serde::{Deserialize, Serialize};

use super::StatError;

/// Result of Benjamini-Hochberg step-up selection over `m` simultaneous tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionSet {
    pub m: usize,
    pub alpha: f64,
    /// Largest p-value that was rejected; `0.0` when nothing was rejected.
    pub threshold: f64,
    /// Indices into the input, ascending.
    pub rejected_indices: Vec<usize>,
    /// BH-adjusted p-values, aligned with the input.
    pub q_values: Vec<f64>,
}

impl RejectionSet {
    pub fn is_rejected(&self, index: usize) -> bool {
        self.rejected_indices.binary_search(&index).is_ok()
    }

    pub fn n_rejected(&self) -> usize {
        self.rejected_indices.len()
    }
}

/// Benjamini-Hochberg step-up rule at FDR level `alpha`.
///
/// Rejects the `k*` smallest p-values where `k* = max{ i : p_(i) <= i * alpha / m }`.
pub fn bh_select(p_values: &[f64], alpha: f64) -> Result<RejectionSet, StatError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatError::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    for (index, &value) in p_values.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(StatError::PValueOutOfRange { index, value });
        }
    }

    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]).then(i.cmp(&j)));

    let mf = m as f64;
    let k_star = order
        .iter()
        .enumerate()
        .rev()
        .find(|&(rank, &idx)| p_values[idx] <= (rank + 1) as f64 * alpha / mf)
        .map(|(rank, _)| rank + 1)
        .unwrap_or(0);

    let threshold = if k_star == 0 { 0.0 } else { p_values[order[k_star - 1]] };

    // Every p-value tied with p_(k*) is rejected along with it.
    let mut rejected_indices: Vec<usize> =
        if k_star == 0 { Vec::new() } else { (0..m).filter(|&i| p_values[i] <= threshold).collect() };
    rejected_indices.sort_unstable();

    let mut q_values = vec![1.0; m];
    let mut running = 1.0f64;
    for (rank, &idx) in order.iter().enumerate().rev() {
        let adjusted = mf * p_values[idx] / (rank + 1) as f64;
        running = running.min(adjusted);
        // q >= p holds exactly; the max undoes rounding in m * p / rank
        q_values[idx] = running.min(1.0).max(p_values[idx]);
    }
    Ok(RejectionSet { m, alpha, threshold, rejected_indices, q_values })
}

/// Expected number of falsely rejected nulls when all `m` hypotheses are null
/// and each is tested at `p_threshold`.
pub fn expected_false_positives(m: usize, p_threshold: f64) -> f64 {
    m as f64 * p_threshold
}

/// Share of `rejections` that would be expected to be false under a global
/// null, `m * p_threshold / rejections`, clamped to 1. `None` without rejections.
pub fn expected_false_proportion(m: usize, p_threshold: f64, rejections: usize) -> Option<f64> {
    (rejections > 0).then(|| (expected_false_positives(m, p_threshold) / rejections as f64).min(1.0))
}
