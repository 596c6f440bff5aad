use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{FaultModel, HealthState, MachineState, RepairAction, RepairError, Status, WatchdogReport};

/// A machine is in error iff at least one watchdog reports `Error`.
/// No reports means no error.
pub fn error_predicate<'a>(statuses: impl IntoIterator<Item = &'a Status>) -> bool {
    statuses.into_iter().any(|&s| s == Status::Error)
}

/// Reboot, then ReImage, then Replace, counting non-trivial repairs issued
/// within the last `window` ticks.
pub fn escalation_policy(history: &[(u64, RepairAction)], now: u64, window: u64, in_error: bool) -> RepairAction {
    if !in_error {
        return RepairAction::DoNothing;
    }
    let recent =
        history.iter().filter(|&&(t, a)| a != RepairAction::DoNothing && now.saturating_sub(t) <= window).count();
    match recent {
        0 => RepairAction::Reboot,
        1 => RepairAction::ReImage,
        _ => RepairAction::Replace,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RepairPolicy {
    Escalation { window: u64 },
    AlwaysDoNothing,
    AlwaysReplace,
}

impl Default for RepairPolicy {
    fn default() -> Self {
        RepairPolicy::Escalation { window: 100 }
    }
}

impl RepairPolicy {
    pub fn choose(&self, history: &[(u64, RepairAction)], now: u64, in_error: bool) -> RepairAction {
        match *self {
            RepairPolicy::Escalation { window } => escalation_policy(history, now, window, in_error),
            _ if !in_error => RepairAction::DoNothing,
            RepairPolicy::AlwaysDoNothing => RepairAction::DoNothing,
            RepairPolicy::AlwaysReplace => RepairAction::Replace,
        }
    }
}

impl fmt::Display for RepairPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepairPolicy::Escalation { window } => write!(f, "escalation:{window}"),
            RepairPolicy::AlwaysDoNothing => f.write_str("do-nothing"),
            RepairPolicy::AlwaysReplace => f.write_str("always-replace"),
        }
    }
}

impl FromStr for RepairPolicy {
    type Err = String;

    /// `escalation`, `escalation:<window>`, `do-nothing` or `always-replace`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some(("escalation", w)) => {
                w.parse().map(|window| RepairPolicy::Escalation { window }).map_err(|_| format!("bad window `{w}`"))
            }
            None if s == "escalation" => Ok(RepairPolicy::default()),
            None if s == "do-nothing" => Ok(RepairPolicy::AlwaysDoNothing),
            None if s == "always-replace" => Ok(RepairPolicy::AlwaysReplace),
            _ => Err(format!("unknown policy `{s}`")),
        }
    }
}

/// Advances every machine by one tick and returns the actions issued, in
/// machine order.
///
/// A healthy machine in error moves to `Failure` with the policy's action.
/// A failed machine whose action has had its latency is either released to
/// `Healthy` (no error) or handed the policy's next action.
pub fn device_manager_step(
    machines: &mut BTreeMap<String, MachineState>,
    tick: u64,
    reports: &[WatchdogReport],
    policy: &RepairPolicy,
    model: &FaultModel,
) -> Result<Vec<(String, RepairAction)>, RepairError> {
    let mut in_error: BTreeMap<&str, bool> = BTreeMap::new();
    for r in reports {
        if !machines.contains_key(&r.machine) {
            return Err(RepairError::UnknownMachine(r.machine.clone()));
        }
        *in_error.entry(&r.machine).or_default() |= r.status == Status::Error;
    }
    let mut issued = Vec::new();
    for (id, m) in machines.iter_mut() {
        let err = in_error.get(id.as_str()).copied().unwrap_or(false);
        let assign = match m.state {
            HealthState::Healthy => err,
            HealthState::Failure => {
                let action = m.pending_action.expect("failed machines carry an action");
                let started = m.action_started.expect("failed machines carry a start tick");
                let done = tick.saturating_sub(started) >= model.latency.get(action);
                if done && !err {
                    m.state = HealthState::Healthy;
                    m.pending_action = None;
                    m.action_started = None;
                }
                done && err
            }
        };
        if assign {
            let action = policy.choose(&m.history, tick, true);
            m.state = HealthState::Failure;
            m.pending_action = Some(action);
            m.action_started = Some(tick);
            m.history.push((tick, action));
            issued.push((id.clone(), action));
        }
    }
    Ok(issued)
}
