//! Metric datasets with planted violation causes.
//!
//! Every metric is standard normal noise. A violating epoch draws one cause
//! uniformly and shifts each of that cause's metrics by `shift` with
//! probability `coverage` (at least one is always shifted); its ART is drawn
//! around `art_violation` instead of `art_compliant`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{label_slo, MetricDataset, SloConfig, SloState};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub n_epochs: usize,
    pub n_metrics: usize,
    /// Metric indices driven by each cause.
    pub causes: Vec<Vec<usize>>,
    pub violation_rate: f64,
    pub shift: f64,
    /// Chance that each metric of the active cause is shifted. Below 1 no
    /// single metric witnesses every violation of its cause.
    pub coverage: f64,
    pub art_compliant: f64,
    pub art_violation: f64,
    pub slo_threshold: f64,
    pub start_ts: f64,
    pub epoch_seconds: f64,
    pub seed: u64,
}

impl PlantedSpec {
    pub fn small() -> Self {
        Self {
            n_epochs: 1000,
            n_metrics: 8,
            causes: vec![vec![0, 1], vec![4, 5]],
            violation_rate: 0.3,
            shift: 6.0,
            coverage: 1.0,
            art_compliant: 100.0,
            art_violation: 300.0,
            slo_threshold: 200.0,
            start_ts: 0.0,
            epoch_seconds: 60.0,
            seed: 0,
        }
    }

    /// 30 metrics, three causes with three metrics each, 10k epochs; each cause
    /// metric is shifted by 8 in 80% of its cause's violations.
    pub fn reference(seed: u64) -> Self {
        Self {
            n_epochs: 10_000,
            n_metrics: 30,
            causes: vec![vec![2, 9, 17], vec![5, 11, 23], vec![14, 20, 28]],
            shift: 8.0,
            coverage: 0.8,
            seed,
            ..Self::small()
        }
    }

    pub fn slo(&self) -> SloConfig {
        SloConfig { threshold: self.slo_threshold }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedData {
    pub dataset: MetricDataset,
    pub labels: Vec<SloState>,
    /// Cause of each violating epoch.
    pub causes: Vec<Option<usize>>,
    /// Metrics actually shifted in each epoch, ascending.
    pub shifted: Vec<Vec<usize>>,
}

pub fn planted_data(spec: &PlantedSpec) -> PlantedData {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let names = (0..spec.n_metrics).map(|i| format!("m{i:02}")).collect();
    let mut ds = MetricDataset::new(names);
    let art_noise = Normal::new(0.0, 15.0).expect("valid sd");
    let mut causes = Vec::with_capacity(spec.n_epochs);
    let mut shifted = Vec::with_capacity(spec.n_epochs);
    for i in 0..spec.n_epochs {
        let cause = (!spec.causes.is_empty() && rng.random::<f64>() < spec.violation_rate)
            .then(|| rng.random_range(0..spec.causes.len()));
        let mut metrics: Vec<f64> = (0..spec.n_metrics).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut hit = Vec::new();
        let art = match cause {
            Some(c) => {
                let members = &spec.causes[c];
                while hit.is_empty() && !members.is_empty() {
                    hit = members.iter().copied().filter(|_| rng.random::<f64>() < spec.coverage).collect();
                }
                hit.sort_unstable();
                for &m in &hit {
                    metrics[m] += spec.shift;
                }
                spec.art_violation + art_noise.sample(&mut rng)
            }
            None => spec.art_compliant + art_noise.sample(&mut rng),
        };
        ds.push(spec.start_ts + i as f64 * spec.epoch_seconds, art.max(1.0), metrics);
        causes.push(cause);
        shifted.push(hit);
    }
    let labels = label_slo(&ds, &spec.slo());
    PlantedData { dataset: ds, labels, causes, shifted }
}

/// Returns the dataset, its SLO labels, and the planted cause of each epoch.
pub fn planted_dataset(spec: &PlantedSpec) -> (MetricDataset, Vec<SloState>, Vec<Option<usize>>) {
    let d = planted_data(spec);
    (d.dataset, d.labels, d.causes)
}
