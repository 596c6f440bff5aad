use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    device_manager_step, FaultModel, MachineState, RepairError, RepairLog, RepairPolicy, RepairRecord, Status,
    TruthRecord, WatchdogReport,
};

/// Zero-padded so lexical order matches index order.
pub fn machine_id(index: usize, fleet: usize) -> String {
    let width = fleet.saturating_sub(1).to_string().len().max(4);
    format!("m{index:0width$}")
}

struct SimMachine {
    id: String,
    rng: ChaCha8Rng,
    persistent: bool,
    /// Tick at which the current repair completes and whether it clears the fault.
    fix: Option<(u64, bool)>,
}

/// Runs the detection/repair loop for `horizon` ticks.
///
/// Each machine draws from its own stream of a seeded ChaCha generator, so
/// results depend only on `(seed, machine index)` and not on iteration order.
/// Per tick: complete due repairs, sample faults, sample watchdog reports,
/// step the device manager, then draw the outcome of each issued repair.
pub fn simulate(
    fleet: usize,
    model: &FaultModel,
    policy: &RepairPolicy,
    horizon: u64,
    seed: u64,
) -> Result<RepairLog, RepairError> {
    model.validate()?;
    if fleet == 0 || horizon == 0 {
        return Err(RepairError::InvalidConfig("fleet and horizon must both be at least 1".into()));
    }
    let mut sims: Vec<SimMachine> = (0..fleet)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            SimMachine { id: machine_id(i, fleet), rng, persistent: false, fix: None }
        })
        .collect();
    let mut machines: BTreeMap<String, MachineState> =
        sims.iter().map(|m| (m.id.clone(), MachineState::default())).collect();
    let index: BTreeMap<String, usize> = sims.iter().enumerate().map(|(i, m)| (m.id.clone(), i)).collect();

    let capacity = fleet * horizon as usize;
    let mut records = Vec::with_capacity(capacity);
    let mut truth = Vec::with_capacity(capacity);
    for tick in 0..horizon {
        let mut reports = Vec::with_capacity(fleet * model.watchdogs.len());
        let mut transient = vec![false; fleet];
        for (i, m) in sims.iter_mut().enumerate() {
            if let Some((at, clears)) = m.fix {
                if tick >= at {
                    m.persistent &= !clears;
                    m.fix = None;
                }
            }
            let onset = m.rng.random::<f64>() < model.persistent_rate;
            m.persistent |= onset;
            transient[i] = m.rng.random::<f64>() < model.transient_rate;
            let faulty = m.persistent || transient[i];
            for w in &model.watchdogs {
                let u = m.rng.random::<f64>();
                let status = if faulty {
                    if u < w.false_negative_rate {
                        Status::Ok
                    } else {
                        Status::Error
                    }
                } else if u < w.false_positive_rate {
                    Status::Error
                } else if u < w.false_positive_rate + (1.0 - w.false_positive_rate) * w.warning_rate {
                    Status::Warning
                } else {
                    Status::Ok
                };
                reports.push(WatchdogReport { time: tick, watchdog: w.id.clone(), machine: m.id.clone(), status });
            }
        }

        let issued = device_manager_step(&mut machines, tick, &reports, policy, model)?;
        let mut actions = vec![None; fleet];
        for (id, action) in issued {
            let i = index[&id];
            let m = &mut sims[i];
            let clears = m.rng.random::<f64>() < model.efficacy.get(action);
            m.fix = Some((tick + model.latency.get(action), clears));
            actions[i] = Some(action);
        }

        let nw = model.watchdogs.len();
        for (i, m) in sims.iter().enumerate() {
            records.push(RepairRecord {
                tick,
                machine: m.id.clone(),
                state: machines[&m.id].state,
                action: actions[i],
                reports: reports[i * nw..(i + 1) * nw].iter().map(|r| (r.watchdog.clone(), r.status)).collect(),
            });
            truth.push(TruthRecord { tick, machine: m.id.clone(), persistent: m.persistent, transient: transient[i] });
        }
    }
    Ok(RepairLog { records, truth: Some(truth) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repair::{HealthState, RepairAction};

    #[test]
    fn ids_sort_by_index() {
        assert_eq!(machine_id(7, 20), "m0007");
        assert_eq!(machine_id(12345, 20000), "m12345");
        assert!(machine_id(9, 10) < machine_id(10, 11));
    }

    #[test]
    fn quiet_fleet_stays_healthy() {
        let log = simulate(5, &FaultModel::default(), &RepairPolicy::default(), 200, 1).unwrap();
        assert_eq!(log.records.len(), 1000);
        assert!(log.records.iter().all(|r| r.state == HealthState::Healthy && r.action.is_none()));
    }

    #[test]
    fn same_seed_same_log() {
        let model = FaultModel { transient_rate: 0.01, persistent_rate: 0.002, ..FaultModel::default() };
        let a = simulate(10, &model, &RepairPolicy::default(), 300, 9).unwrap();
        let b = simulate(10, &model, &RepairPolicy::default(), 300, 9).unwrap();
        let c = simulate(10, &model, &RepairPolicy::default(), 300, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn stubborn_fault_reaches_replace() {
        let mut model = FaultModel { persistent_rate: 1.0, ..FaultModel::default() };
        model.efficacy.reimage = 0.0;
        for w in &mut model.watchdogs {
            w.false_negative_rate = 0.0;
        }
        let log = simulate(1, &model, &RepairPolicy::default(), 50, 3).unwrap();
        let first = log.records.iter().find(|r| r.action == Some(RepairAction::Replace)).unwrap();
        // Reboot at 0, ReImage at 1, Replace once ReImage's 3 ticks elapse.
        assert_eq!(first.tick, 4);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(simulate(0, &FaultModel::default(), &RepairPolicy::default(), 10, 0).is_err());
        let bad = FaultModel { transient_rate: 1.5, ..FaultModel::default() };
        assert!(simulate(1, &bad, &RepairPolicy::default(), 10, 0).is_err());
    }
}
