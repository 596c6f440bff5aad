//! Per-host channel dependence tests and the dependency graph built from them.
//!
//! For each (input, output) channel pair on a host, the delays from input
//! events to output events are compared against delays from the same input to
//! a virtual output channel with uniformly random departures. Pairs whose delay
//! distributions differ are declared dependent, with the false discovery rate
//! controlled across all of the host's pairs.

mod export;
mod graph;
mod local;

pub use export::{export_graph, import_graph_json, write_pair_table, GraphFormat, PAIR_TABLE_HEADER};
pub use graph::{build_graph, graph_diff, DependencyGraph, EdgeEvidence, EdgeKey, GraphDiff};
pub use local::{local_dependencies, ChannelPairResult};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::stats::LogOddsModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// KS test against the virtual channel, BH-selected across the host's pairs.
    Ks,
    /// Bayes factor above [`DiscoveryConfig::log_odds_threshold`].
    LogOdds,
    /// Both of the above must agree.
    Both,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ks => "ks",
            Method::LogOdds => "log-odds",
            Method::Both => "both",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ks" => Ok(Method::Ks),
            "log-odds" | "log_odds" => Ok(Method::LogOdds),
            "both" => Ok(Method::Both),
            other => Err(format!("unknown method `{other}` (expected ks, log-odds or both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscoveryConfig {
    /// Longest input-to-output gap that still counts as a delay, seconds.
    pub horizon: f64,
    /// FDR level for BH selection.
    pub alpha: f64,
    /// Pairs with fewer paired delays are reported but not tested.
    pub min_samples: usize,
    pub method: Method,
    pub seed: u64,
    /// Natural-log Bayes factor needed by the log-odds method (default `ln 20`).
    pub log_odds_threshold: f64,
    pub bins: usize,
    pub dirichlet_alpha: f64,
    /// Independent virtual channels drawn per pair; their KS statistics are averaged.
    pub replications: usize,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            alpha: 0.05,
            min_samples: 10,
            method: Method::Ks,
            seed: 0,
            log_odds_threshold: 20f64.ln(),
            bins: 20,
            dirichlet_alpha: 1.0,
            replications: 1,
        }
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.min_samples == 0 {
            return Err("min_samples must be at least 1".into());
        }
        if self.replications == 0 {
            return Err("replications must be at least 1".into());
        }
        self.log_odds_model().map(|_| ()).map_err(|e| e.to_string())
    }

    pub fn log_odds_model(&self) -> Result<LogOddsModel, crate::stats::StatError> {
        LogOddsModel::new(self.horizon, self.bins, self.dirichlet_alpha)
    }
}
