//! Datacenter fault detection and repair loop.
//!
//! Watchdogs probe machines and report `OK`, `Warning` or `Error`. A device
//! manager turns those reports into a Healthy/Failure state per machine and,
//! on failure, picks a repair action according to a policy. The simulator
//! drives this loop over discrete ticks; the mining functions read its log.

mod device_manager;
mod logfmt;
mod mining;
mod sim;

pub use device_manager::{device_manager_step, error_predicate, escalation_policy, RepairPolicy};
pub use logfmt::{parse_log, parse_truth, write_log, write_truth};
pub use mining::{
    estimate_watchdog_fpr, evaluate_policy, failure_episodes, CostModel, FailureEpisode, PolicyMetrics,
    WatchdogEstimate,
};
pub use sim::{machine_id, simulate};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("report for unknown machine `{0}`")]
    UnknownMachine(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty log")]
    EmptyLog,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "OK")]
    Ok,
    Warning,
    Error,
}

impl Status {
    pub const ALL: [Status; 3] = [Status::Ok, Status::Warning, Status::Error];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "OK",
            Status::Warning => "Warning",
            Status::Error => "Error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "OK" => Ok(Status::Ok),
            "Warning" => Ok(Status::Warning),
            "Error" => Ok(Status::Error),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatchdogReport {
    pub time: u64,
    pub watchdog: String,
    pub machine: String,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RepairAction {
    Reboot,
    ReImage,
    Replace,
    DoNothing,
}

impl RepairAction {
    pub const ALL: [RepairAction; 4] =
        [RepairAction::Reboot, RepairAction::ReImage, RepairAction::Replace, RepairAction::DoNothing];

    pub fn as_str(self) -> &'static str {
        match self {
            RepairAction::Reboot => "Reboot",
            RepairAction::ReImage => "ReImage",
            RepairAction::Replace => "Replace",
            RepairAction::DoNothing => "DoNothing",
        }
    }
}

impl fmt::Display for RepairAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RepairAction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RepairAction::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| format!("unknown action `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HealthState {
    Healthy,
    Failure,
}

impl HealthState {
    pub fn as_str(self) -> &'static str {
        match self {
            HealthState::Healthy => "Healthy",
            HealthState::Failure => "Failure",
        }
    }
}

impl FromStr for HealthState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Healthy" => Ok(HealthState::Healthy),
            "Failure" => Ok(HealthState::Failure),
            other => Err(format!("unknown state `{other}`")),
        }
    }
}

/// Device Manager view of one machine. `pending_action` is set iff the machine
/// is in `Failure`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineState {
    pub state: HealthState,
    pub pending_action: Option<RepairAction>,
    /// Tick at which the pending action was issued.
    pub action_started: Option<u64>,
    pub history: Vec<(u64, RepairAction)>,
}

impl Default for MachineState {
    fn default() -> Self {
        Self { state: HealthState::Healthy, pending_action: None, action_started: None, history: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatchdogSpec {
    pub id: String,
    /// `P(Error | machine not faulty)`.
    pub false_positive_rate: f64,
    /// `P(not Error | machine faulty)`.
    pub false_negative_rate: f64,
    /// `P(Warning | machine not faulty, no false alarm)`; warnings are inert.
    #[serde(default)]
    pub warning_rate: f64,
}

impl WatchdogSpec {
    pub fn new(id: &str, false_positive_rate: f64, false_negative_rate: f64) -> Self {
        Self { id: id.into(), false_positive_rate, false_negative_rate, warning_rate: 0.0 }
    }
}

/// Per-action values indexed by [`RepairAction`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerAction<T> {
    pub reboot: T,
    pub reimage: T,
    pub replace: T,
    pub do_nothing: T,
}

impl<T: Copy> PerAction<T> {
    pub fn get(&self, action: RepairAction) -> T {
        match action {
            RepairAction::Reboot => self.reboot,
            RepairAction::ReImage => self.reimage,
            RepairAction::Replace => self.replace,
            RepairAction::DoNothing => self.do_nothing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FaultModel {
    /// Per machine per tick; a transient fault lasts exactly one tick.
    pub transient_rate: f64,
    /// Per machine per tick; persists until a repair clears it.
    pub persistent_rate: f64,
    pub watchdogs: Vec<WatchdogSpec>,
    /// Probability that a completed action clears a persistent fault.
    pub efficacy: PerAction<f64>,
    /// Ticks until an action completes.
    pub latency: PerAction<u64>,
}

impl Default for FaultModel {
    fn default() -> Self {
        Self {
            transient_rate: 0.0,
            persistent_rate: 0.0,
            watchdogs: vec![
                WatchdogSpec::new("disk", 0.0, 0.05),
                WatchdogSpec::new("net", 0.0, 0.05),
                WatchdogSpec::new("svc", 0.0, 0.05),
            ],
            efficacy: PerAction { reboot: 0.0, reimage: 0.5, replace: 1.0, do_nothing: 0.0 },
            latency: PerAction { reboot: 1, reimage: 3, replace: 10, do_nothing: 1 },
        }
    }
}

impl FaultModel {
    pub fn validate(&self) -> Result<(), RepairError> {
        let bad = |m: String| Err(RepairError::InvalidConfig(m));
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        let below_one = |p: f64| (0.0..1.0).contains(&p);
        if !unit(self.transient_rate) || !unit(self.persistent_rate) {
            return bad("fault rates must lie in [0, 1]".into());
        }
        for w in &self.watchdogs {
            if !crate::trace::is_valid_token(&w.id) {
                return bad(format!("watchdog id `{}` is not a valid identifier", w.id));
            }
            if !below_one(w.false_positive_rate) || !below_one(w.false_negative_rate) || !unit(w.warning_rate) {
                return bad(format!("watchdog `{}`: rates must lie in [0, 1)", w.id));
            }
        }
        let mut ids: Vec<&str> = self.watchdogs.iter().map(|w| w.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("duplicate watchdog id".into());
        }
        for a in RepairAction::ALL {
            if !unit(self.efficacy.get(a)) {
                return bad(format!("{a} efficacy must lie in [0, 1]"));
            }
            if self.latency.get(a) < 1 {
                return bad(format!("{a} latency must be at least 1 tick"));
            }
        }
        Ok(())
    }

    pub fn max_latency(&self) -> u64 {
        RepairAction::ALL.iter().map(|&a| self.latency.get(a)).max().unwrap_or(1)
    }
}

/// One machine at one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairRecord {
    pub tick: u64,
    pub machine: String,
    pub state: HealthState,
    /// Action issued at this tick, if any.
    pub action: Option<RepairAction>,
    pub reports: Vec<(String, Status)>,
}

/// Simulator-only fault status for one machine at one tick.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub tick: u64,
    pub machine: String,
    pub persistent: bool,
    pub transient: bool,
}

impl TruthRecord {
    pub fn faulty(&self) -> bool {
        self.persistent || self.transient
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RepairLog {
    /// Ordered by tick, then machine.
    pub records: Vec<RepairRecord>,
    /// Aligned with `records` when present.
    pub truth: Option<Vec<TruthRecord>>,
}

impl RepairLog {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Attaches a ground-truth channel, checking it is keyed like the records.
    pub fn with_truth(mut self, truth: Vec<TruthRecord>) -> Result<Self, RepairError> {
        if truth.len() != self.records.len() {
            return Err(RepairError::Parse {
                line: truth.len().min(self.records.len()) + 1,
                message: format!("truth has {} records, log has {}", truth.len(), self.records.len()),
            });
        }
        for (i, (r, t)) in self.records.iter().zip(&truth).enumerate() {
            if r.tick != t.tick || r.machine != t.machine {
                return Err(RepairError::Parse {
                    line: i + 1,
                    message: format!("truth key tick={} machine={} does not match log", t.tick, t.machine),
                });
            }
        }
        self.truth = Some(truth);
        Ok(self)
    }
}
