use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::StatError;

/// Binned conjugate model used for the Bayes-factor dependence test.
///
/// The null model puts delays uniformly on `[0, horizon]`; the alternative
/// draws bin probabilities from a symmetric Dirichlet with concentration
/// `dirichlet_alpha` over `bins` equal-width bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogOddsModel {
    pub horizon: f64,
    pub bins: usize,
    pub dirichlet_alpha: f64,
}

impl Default for LogOddsModel {
    fn default() -> Self {
        Self { horizon: 1.0, bins: 20, dirichlet_alpha: 1.0 }
    }
}

impl LogOddsModel {
    pub fn new(horizon: f64, bins: usize, dirichlet_alpha: f64) -> Result<Self, StatError> {
        let model = Self { horizon, bins, dirichlet_alpha };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), StatError> {
        if self.bins < 2 {
            return Err(StatError::InvalidArgument(format!("need at least 2 bins, got {}", self.bins)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(StatError::InvalidArgument(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.dirichlet_alpha > 0.0 && self.dirichlet_alpha.is_finite()) {
            return Err(StatError::InvalidArgument(format!(
                "dirichlet_alpha must be positive, got {}",
                self.dirichlet_alpha
            )));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        self.horizon / self.bins as f64
    }

    fn bin_of(&self, delay: f64) -> usize {
        ((delay / self.bin_width()) as usize).min(self.bins - 1)
    }
}

/// Log Bayes factor of Dirichlet-multinomial binned delays against uniform delays.
///
/// `log BF = ln Gamma(K a) - ln Gamma(n + K a) + sum_k [ln Gamma(c_k + a) - ln Gamma(a)] + n ln K`.
/// Positive values favour dependence.
pub fn log_odds_dependence(delays: &[f64], model: &LogOddsModel) -> Result<f64, StatError> {
    model.validate()?;
    let mut counts = vec![0usize; model.bins];
    for (index, &value) in delays.iter().enumerate() {
        if !(value >= 0.0 && value <= model.horizon) {
            return Err(StatError::DelayOutOfRange { index, value, horizon: model.horizon });
        }
        counts[model.bin_of(value)] += 1;
    }
    let n = delays.len() as f64;
    let k = model.bins as f64;
    let a = model.dirichlet_alpha;
    let ln_gamma_a = ln_gamma(a);
    let per_bin: f64 = counts.iter().map(|&c| ln_gamma(c as f64 + a) - ln_gamma_a).sum();
    Ok(ln_gamma(k * a) - ln_gamma(n + k * a) + per_bin + n * k.ln())
}
