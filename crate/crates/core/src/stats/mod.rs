//! Hypothesis-testing primitives shared by the discovery, diagnosis and
//! repair pipelines.
//!
//! Everything in here is a pure function of its inputs (plus an explicit
//! seed where randomness is involved), so tests can be evaluated in parallel
//! and re-runs are reproducible.

mod bayes;
mod ecdf;
mod fdr;
mod ks;
mod significance;

pub use bayes::{log_odds_dependence, LogOddsModel};
pub use ecdf::EmpiricalCdf;
pub use fdr::{bh_select, expected_false_positives, expected_false_proportion, RejectionSet};
pub use ks::{ks_p_value, ks_statistic, ks_test, permutation_p_value};
pub use significance::{calibrate_p_value, mean_difference_test, two_sided_normal_p};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatError {
    #[error("no samples")]
    NoSamples,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("p-value at index {index} is outside [0, 1]: {value}")]
    PValueOutOfRange { index: usize, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("delay {value} at index {index} is outside [0, {horizon}]")]
    DelayOutOfRange { index: usize, value: f64, horizon: f64 },
}

/// Outcome of a single two-sample test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    /// The test statistic; larger values are stronger evidence against the null.
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
    /// `p_value <= level` for the level the test was run at.
    pub significant: bool,
    /// Effect-size gate, only set by tests that have one.
    pub practically_significant: Option<bool>,
}

impl TestOutcome {
    pub(crate) fn new(statistic: f64, p_value: f64, n_a: usize, n_b: usize, level: f64) -> Self {
        Self { statistic, p_value, n_a, n_b, significant: p_value <= level, practically_significant: None }
    }
}

pub(crate) fn check_finite(samples: &[f64]) -> Result<(), StatError> {
    match samples.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(StatError::NonFinite(i)),
        None => Ok(()),
    }
}
