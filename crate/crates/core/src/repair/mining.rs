use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{HealthState, PerAction, RepairAction, RepairLog, Status};

/// Per-watchdog reliability estimate mined from a log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatchdogEstimate {
    pub watchdog: String,
    pub reports: u64,
    pub errors: u64,
    /// Reports made while no other watchdog reported `Error` on that machine.
    pub uncorroborated_opportunities: u64,
    /// `Error` reports no other watchdog confirmed at the same tick.
    pub uncorroborated_errors: u64,
    /// `uncorroborated_errors / uncorroborated_opportunities`; absent when the
    /// watchdog never reported `Error` or it is the only watchdog.
    pub estimated_fpr: Option<f64>,
    /// Share of `Error`s followed by a Reboot/DoNothing and then no `Error`
    /// from any watchdog for the lookahead window.
    pub lookahead_false_share: Option<f64>,
    /// From the ground-truth channel: `P(Error | machine not faulty)`.
    pub true_fpr: Option<f64>,
}

/// Estimates watchdog false-positive rates from the log alone, using the
/// other watchdogs as a consensus reference: a real fault makes the others
/// report `Error` too (up to their miss rate), a false alarm does not.
///
/// `lookahead` sets the window for the secondary `lookahead_false_share`.
pub fn estimate_watchdog_fpr(log: &RepairLog, lookahead: u64) -> Vec<WatchdogEstimate> {
    #[derive(Default)]
    struct Acc {
        reports: u64,
        errors: u64,
        opportunities: u64,
        uncorroborated: u64,
        quiet_followups: u64,
        healthy_reports: u64,
        healthy_errors: u64,
    }
    let mut acc: BTreeMap<&str, Acc> = BTreeMap::new();
    let quiet = quiet_after(log, lookahead);
    for (i, r) in log.records.iter().enumerate() {
        let n_err = r.reports.iter().filter(|(_, s)| *s == Status::Error).count();
        let faulty = log.truth.as_ref().map(|t| t[i].faulty());
        for (w, s) in &r.reports {
            let a = acc.entry(w.as_str()).or_default();
            let is_err = *s == Status::Error;
            a.reports += 1;
            a.errors += u64::from(is_err);
            // Errors from the other watchdogs only.
            if n_err - usize::from(is_err) == 0 {
                a.opportunities += 1;
                a.uncorroborated += u64::from(is_err);
            }
            if is_err && quiet[i] {
                a.quiet_followups += 1;
            }
            if faulty == Some(false) {
                a.healthy_reports += 1;
                a.healthy_errors += u64::from(is_err);
            }
        }
    }
    let n_watchdogs = acc.len();
    acc.into_iter()
        .map(|(w, a)| {
            let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
            let defined = a.errors > 0 && n_watchdogs > 1;
            WatchdogEstimate {
                watchdog: w.to_string(),
                reports: a.reports,
                errors: a.errors,
                uncorroborated_opportunities: a.opportunities,
                uncorroborated_errors: a.uncorroborated,
                estimated_fpr: if defined { ratio(a.uncorroborated, a.opportunities) } else { None },
                lookahead_false_share: if a.errors > 0 { ratio(a.quiet_followups, a.errors) } else { None },
                true_fpr: log.truth.as_ref().and_then(|_| ratio(a.healthy_errors, a.healthy_reports)),
            }
        })
        .collect()
}

/// For each record: the machine got a Reboot or DoNothing at this tick and no
/// watchdog reports `Error` on it in the next `lookahead` ticks (all of which
/// must be in the log).
fn quiet_after(log: &RepairLog, lookahead: u64) -> Vec<bool> {
    let mut per_machine: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in log.records.iter().enumerate() {
        per_machine.entry(r.machine.as_str()).or_default().push(i);
    }
    let mut quiet = vec![false; log.records.len()];
    for idx in per_machine.values() {
        let recs: Vec<_> = idx.iter().map(|&i| &log.records[i]).collect();
        for (k, r) in recs.iter().enumerate() {
            if !matches!(r.action, Some(RepairAction::Reboot | RepairAction::DoNothing)) {
                continue;
            }
            let end = r.tick + lookahead;
            let window: Vec<_> = recs[k + 1..].iter().take_while(|x| x.tick <= end).collect();
            let covered = window.last().is_some_and(|x| x.tick == end);
            let clean = window.iter().all(|x| x.reports.iter().all(|(_, s)| *s != Status::Error));
            quiet[idx[k]] = covered && clean;
        }
    }
    quiet
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub action: PerAction<f64>,
    /// Charged per machine per tick in `Failure`.
    pub downtime_per_tick: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self { action: PerAction { reboot: 1.0, reimage: 5.0, replace: 50.0, do_nothing: 0.0 }, downtime_per_tick: 1.0 }
    }
}

/// A maximal run of consecutive `Failure` ticks on one machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureEpisode {
    pub machine: String,
    pub start: u64,
    pub ticks: u64,
    /// False when the log ends before the machine is Healthy again.
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyMetrics {
    pub machine_ticks: u64,
    pub failure_ticks: u64,
    pub availability: f64,
    pub total_cost: f64,
    pub action_counts: BTreeMap<String, u64>,
    pub episodes: usize,
    pub resolved_episodes: usize,
    /// Mean length of resolved episodes.
    pub mean_time_to_healthy: Option<f64>,
}

pub fn failure_episodes(log: &RepairLog) -> Vec<FailureEpisode> {
    let mut open: BTreeMap<&str, (u64, u64, u64)> = BTreeMap::new(); // start, ticks, last tick
    let mut done = Vec::new();
    for r in &log.records {
        let m = r.machine.as_str();
        match r.state {
            HealthState::Failure => match open.get_mut(m) {
                Some(e) if e.2 + 1 == r.tick => {
                    e.1 += 1;
                    e.2 = r.tick;
                }
                _ => {
                    // A gap in the log also ends an episode.
                    if let Some((start, ticks, _)) = open.insert(m, (r.tick, 1, r.tick)) {
                        done.push(FailureEpisode { machine: m.to_string(), start, ticks, resolved: false });
                    }
                }
            },
            HealthState::Healthy => {
                if let Some((start, ticks, last)) = open.remove(m) {
                    let resolved = last + 1 == r.tick;
                    done.push(FailureEpisode { machine: m.to_string(), start, ticks, resolved });
                }
            }
        }
    }
    done.extend(open.into_iter().map(|(m, (start, ticks, _))| FailureEpisode {
        machine: m.to_string(),
        start,
        ticks,
        resolved: false,
    }));
    done.sort_by(|a, b| (a.start, &a.machine).cmp(&(b.start, &b.machine)));
    done
}

pub fn evaluate_policy(log: &RepairLog, costs: &CostModel) -> PolicyMetrics {
    let machine_ticks = log.records.len() as u64;
    let failure_ticks = log.records.iter().filter(|r| r.state == HealthState::Failure).count() as u64;
    let mut action_counts: BTreeMap<String, u64> =
        RepairAction::ALL.iter().map(|a| (a.as_str().to_string(), 0)).collect();
    let mut total_cost = costs.downtime_per_tick * failure_ticks as f64;
    for a in log.records.iter().filter_map(|r| r.action) {
        *action_counts.get_mut(a.as_str()).expect("all actions counted") += 1;
        total_cost += costs.action.get(a);
    }
    let episodes = failure_episodes(log);
    let resolved: Vec<_> = episodes.iter().filter(|e| e.resolved).collect();
    let mean_time_to_healthy =
        (!resolved.is_empty()).then(|| resolved.iter().map(|e| e.ticks as f64).sum::<f64>() / resolved.len() as f64);
    PolicyMetrics {
        machine_ticks,
        failure_ticks,
        availability: if machine_ticks == 0 {
            1.0
        } else {
            (machine_ticks - failure_ticks) as f64 / machine_ticks as f64
        },
        total_cost,
        action_counts,
        episodes: episodes.len(),
        resolved_episodes: resolved.len(),
        mean_time_to_healthy,
    }
}
