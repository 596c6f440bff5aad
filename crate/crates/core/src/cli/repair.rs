use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use super::{echo_line, load_config, read_file, sidecar, to_json, write_file, CliError, CmdResult, Outcome};
use crate::num::fmt_f64;
use crate::repair::{
    estimate_watchdog_fpr, evaluate_policy, parse_log, parse_truth, simulate as run_sim, write_log, write_truth,
    CostModel, FaultModel, PolicyMetrics, RepairPolicy, WatchdogEstimate,
};

#[derive(Debug, Args)]
pub struct RepairSimArgs {
    /// TOML file with simulation settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    machines: Option<usize>,
    #[arg(long)]
    ticks: Option<u64>,
    /// `escalation[:<window>]`, `do-nothing` or `always-replace`.
    #[arg(long)]
    policy: Option<RepairPolicy>,
    #[arg(long)]
    transient_rate: Option<f64>,
    #[arg(long)]
    persistent_rate: Option<f64>,
    /// Sets the false-positive rate of every watchdog.
    #[arg(long)]
    fp_rate: Option<f64>,
    /// Log output path; ground truth goes to `<out>.truth`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimConfig {
    seed: u64,
    machines: usize,
    ticks: u64,
    policy: String,
    fault_model: FaultModel,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            machines: 20,
            ticks: 1000,
            policy: RepairPolicy::default().to_string(),
            fault_model: FaultModel::default(),
        }
    }
}

pub fn simulate(args: RepairSimArgs) -> CmdResult {
    let mut config: SimConfig = load_config(args.config.as_deref())?;
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.machines {
        config.machines = v;
    }
    if let Some(v) = args.ticks {
        config.ticks = v;
    }
    if let Some(v) = args.policy {
        config.policy = v.to_string();
    }
    if let Some(v) = args.transient_rate {
        config.fault_model.transient_rate = v;
    }
    if let Some(v) = args.persistent_rate {
        config.fault_model.persistent_rate = v;
    }
    if let Some(v) = args.fp_rate {
        for w in &mut config.fault_model.watchdogs {
            w.false_positive_rate = v;
        }
    }
    let policy: RepairPolicy = config.policy.parse().map_err(CliError)?;
    let log =
        run_sim(config.machines, &config.fault_model, &policy, config.ticks, config.seed).map_err(CliError::new)?;

    let header = format!("# {}\n", echo_line("repair-sim", &config));
    write_file(&args.out, &(header.clone() + &write_log(&log)))?;
    write_file(&sidecar(&args.out), &(header + &write_truth(&log).expect("simulated logs carry truth")))?;
    let m = evaluate_policy(&log, &CostModel::default());
    out!(
        "{} machines x {} ticks, availability {:.4}, {} failure episodes",
        config.machines,
        config.ticks,
        m.availability,
        m.episodes
    );
    Ok(Outcome::Success)
}

#[derive(Debug, Args)]
pub struct RepairMineArgs {
    /// Repair log written by `repair-sim` or in the same format.
    #[arg(long)]
    log: PathBuf,
    /// Ground-truth sidecar, for validating the estimates.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// TOML file with mining settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lookahead window (ticks) for the quiet-after-repair share.
    #[arg(long)]
    lookahead: Option<u64>,
    #[arg(long)]
    cost_reboot: Option<f64>,
    #[arg(long)]
    cost_reimage: Option<f64>,
    #[arg(long)]
    cost_replace: Option<f64>,
    #[arg(long)]
    cost_do_nothing: Option<f64>,
    /// Cost per machine per tick spent in Failure.
    #[arg(long)]
    downtime_cost: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MineConfig {
    lookahead: u64,
    costs: CostModel,
}

impl Default for MineConfig {
    fn default() -> Self {
        Self { lookahead: 20, costs: CostModel::default() }
    }
}

#[derive(Serialize)]
struct MineReport<'a> {
    command: &'static str,
    config: &'a MineConfig,
    /// Header comments of the mined log (the simulator's seed and config).
    source: Vec<&'a str>,
    metrics: &'a PolicyMetrics,
    watchdogs: &'a [WatchdogEstimate],
}

pub fn mine(args: RepairMineArgs) -> CmdResult {
    let mut config: MineConfig = load_config(args.config.as_deref())?;
    if let Some(v) = args.lookahead {
        config.lookahead = v;
    }
    let costs = &mut config.costs;
    for (flag, slot) in [
        (args.cost_reboot, &mut costs.action.reboot),
        (args.cost_reimage, &mut costs.action.reimage),
        (args.cost_replace, &mut costs.action.replace),
        (args.cost_do_nothing, &mut costs.action.do_nothing),
        (args.downtime_cost, &mut costs.downtime_per_tick),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    let text = read_file(&args.log)?;
    let mut log = parse_log(&text).map_err(|e| CliError(format!("{}: {e}", args.log.display())))?;
    if let Some(p) = &args.truth {
        let truth = parse_truth(&read_file(p)?).map_err(|e| CliError(format!("{}: {e}", p.display())))?;
        log = log.with_truth(truth).map_err(|e| CliError(format!("{}: {e}", p.display())))?;
    }

    let estimates = estimate_watchdog_fpr(&log, config.lookahead);
    let metrics = evaluate_policy(&log, &config.costs);
    let source: Vec<&str> =
        text.lines().take_while(|l| l.starts_with('#')).map(|l| l.trim_start_matches('#').trim()).collect();
    let opt = |v: Option<f64>| v.map_or_else(String::new, fmt_f64);
    let mut table = format!(
        "# {}\nwatchdog,reports,errors,uncorroborated_opportunities,uncorroborated_errors,estimated_fpr,lookahead_false_share,true_fpr\n",
        echo_line("repair-mine", &config)
    );
    for e in &estimates {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{},{}",
            e.watchdog,
            e.reports,
            e.errors,
            e.uncorroborated_opportunities,
            e.uncorroborated_errors,
            opt(e.estimated_fpr),
            opt(e.lookahead_false_share),
            opt(e.true_fpr)
        );
    }
    write_file(&args.out.join("watchdogs.csv"), &table)?;
    let report =
        MineReport { command: "repair-mine", config: &config, source, metrics: &metrics, watchdogs: &estimates };
    write_file(&args.out.join("policy.json"), &to_json(&report))?;
    out!(
        "availability {:.4}, total cost {}, mean time to healthy {}",
        metrics.availability,
        metrics.total_cost,
        metrics.mean_time_to_healthy.map_or_else(|| "n/a".to_string(), |t| format!("{t:.2}"))
    );
    for e in &estimates {
        out!("{}: estimated fpr {}", e.watchdog, opt(e.estimated_fpr));
    }
    Ok(Outcome::Success)
}
