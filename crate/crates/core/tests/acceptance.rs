//! Acceptance suite. Runs each criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.
//!
//! `cargo test -p opsinfer --test acceptance`

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use opsinfer::diagnosis::synth::{planted_data, PlantedSpec};
use opsinfer::diagnosis::{
    classify, cluster_signatures, compare_correctness, fit_classifier, mcnemar_exact, retrieve, select_features,
    signature, SelectionConfig, Signature, SignatureCatalog, SloState,
};
use opsinfer::discovery::{
    build_graph, export_graph, local_dependencies, DiscoveryConfig, EdgeKey, GraphFormat, Method,
};
use opsinfer::repair::{
    error_predicate, estimate_watchdog_fpr, evaluate_policy, simulate, CostModel, FaultModel, RepairAction,
    RepairPolicy, Status, WatchdogSpec,
};
use opsinfer::stats::{
    bh_select, expected_false_positives, expected_false_proportion, ks_p_value, ks_statistic, ks_test,
    log_odds_dependence, mean_difference_test, permutation_p_value, EmpiricalCdf, LogOddsModel,
};
use opsinfer::trace::{synth_trace, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Criterion = (&'static str, u64, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let elapsed = start.elapsed();
    v.detail = format!("{}; {:.1}s of {}s budget", v.detail, elapsed.as_secs_f64(), budget.as_secs());
    v.pass &= elapsed <= budget;
    v
}

/// Kolmogorov distance between a sample and Uniform(0, 1).
fn uniform_distance(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter().enumerate().map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n)).fold(0.0, f64::max)
}

fn jaccard(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

fn c1_fdr_arithmetic() -> Verdict {
    let efp = expected_false_positives(10_000, 0.05);
    let prop = expected_false_proportion(10_000, 0.05, 1000);
    let out = Command::new(env!("CARGO_BIN_EXE_opsinfer"))
        .args(["stats", "fdr", "--tests", "10000", "--level", "0.05", "--rejections", "1000"])
        .output()
        .expect("run stats fdr");
    let report = String::from_utf8_lossy(&out.stdout);
    let reported = report.contains("expected_false_positives=500") && report.contains("expected_false_proportion=0.5");
    Verdict::new(
        efp == 500.0 && prop == Some(0.5) && reported && out.status.success(),
        format!("expected_false_positives={efp}, proportion={prop:?}, stats report ok={reported}"),
    )
}

fn c2_fdr_control() -> Verdict {
    let config = DiscoveryConfig::default();
    let seeds = 200;
    let mut fdp_sum = 0.0;
    let mut pairs = 0;
    for seed in 0..seeds {
        let (trace, truth) = synth_trace(&SynthSpec::planted(10, 20, 0, 600.0, Some(0.5), seed)).unwrap();
        assert!(truth.is_empty());
        let results = local_dependencies(&trace, &config);
        pairs = results.len();
        let rejected = results.iter().filter(|r| r.dependent).count();
        // every pair is null, so any discovery is false
        if rejected > 0 {
            fdp_sum += 1.0;
        }
    }
    let mean_fdp = fdp_sum / seeds as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    for _ in 0..1000 {
        let m = rng.random_range(1..=60);
        let p: Vec<f64> = (0..m)
            .map(|_| if rng.random_bool(0.3) { rng.random::<f64>() * 0.01 } else { rng.random::<f64>() })
            .collect();
        let alpha = rng.random_range(0.01..0.2);
        if !bh_monotone(&p, alpha) {
            violations += 1;
        }
    }
    Verdict::new(
        mean_fdp <= 0.08 && pairs == 200 && violations == 0,
        format!("{pairs} pairs x {seeds} seeds, mean FDP {mean_fdp:.4}; BH property violations {violations}/1000"),
    )
}

/// Step-up count by brute force, monotone q-values, rejections form a
/// p-prefix, and a larger alpha never drops a rejection.
fn bh_monotone(p: &[f64], alpha: f64) -> bool {
    let m = p.len();
    let set = bh_select(p, alpha).unwrap();
    let mut sorted = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = (1..=m).rev().find(|&k| sorted[k - 1] <= k as f64 * alpha / m as f64).unwrap_or(0);
    if set.n_rejected() != k {
        return false;
    }
    for i in 0..m {
        for j in 0..m {
            if p[i] <= p[j] && set.q_values[i] > set.q_values[j] {
                return false;
            }
            if p[i] <= p[j] && set.is_rejected(j) && !set.is_rejected(i) {
                return false;
            }
        }
    }
    let wider = bh_select(p, (alpha * 1.5).min(0.99)).unwrap();
    set.rejected_indices.iter().all(|&i| wider.is_rejected(i))
}

fn c3_dependency_recovery() -> Verdict {
    let config = DiscoveryConfig::default();
    let seeds = 50;
    let mut rate_sum = 0.0;
    let mut false_pos = 0;
    let mut min_inputs = usize::MAX;
    for seed in 0..seeds {
        let (trace, truth) = synth_trace(&SynthSpec::reference(seed)).unwrap();
        min_inputs = min_inputs.min(trace.inputs().map(|c| c.len()).sum());
        let truth: BTreeSet<_> = truth.into_iter().collect();
        let results = local_dependencies(&trace, &config);
        let hits =
            results.iter().filter(|r| r.dependent && truth.contains(&(r.input.clone(), r.output.clone()))).count();
        false_pos += results.iter().filter(|r| r.dependent).count() - hits;
        rate_sum += hits as f64 / truth.len() as f64;
    }
    let detection = rate_sum / seeds as f64;

    // Noise-free: outputs only carry planted responses.
    let spec = SynthSpec::planted(10, 11, 10, 1200.0, None, 0);
    let (trace, truth) = synth_trace(&spec).unwrap();
    let both = DiscoveryConfig { method: Method::Both, ..DiscoveryConfig::default() };
    let results = local_dependencies(&trace, &both);
    let graph = build_graph([(trace.host.as_str(), results.as_slice())]);
    let expected: BTreeSet<EdgeKey> = truth
        .iter()
        .flat_map(|(i, o)| {
            [EdgeKey::new(&i.remote, &trace.host, &i.service), EdgeKey::new(&trace.host, &o.remote, &o.service)]
        })
        .collect();
    let got: BTreeSet<EdgeKey> = graph.edges.keys().cloned().collect();
    let exported = opsinfer::discovery::import_graph_json(&export_graph(&graph, GraphFormat::Json)).unwrap();
    let exported: BTreeSet<EdgeKey> = exported.edges.keys().cloned().collect();
    let exact = got == expected && exported == expected;
    Verdict::new(
        detection >= 0.9 && exact && min_inputs >= 1000,
        format!(
            "detection {detection:.3} over {seeds} seeds (false positives {false_pos}, min inputs {min_inputs}); \
             noise-free graph exact={exact} ({} edges, expected {})",
            got.len(),
            expected.len()
        ),
    )
}

fn c4_ks_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let std = Normal::new(0.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for case in 0..50u64 {
        let shift = rng.random_range(0.0..0.35);
        let a: Vec<f64> = (0..200).map(|_| std.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..200).map(|_| std.sample(&mut rng) + shift).collect();
        let asymptotic = ks_test(&a, &b, 0.05).unwrap().p_value;
        let permuted = permutation_p_value(&a, &b, 1999, case).unwrap();
        worst = worst.max((asymptotic - permuted).abs());
    }
    // Null uniformity at per-pair sample sizes typical of discovery (median
    // ~1070 delays on the reference trace). At n = m = 200 the statistic lives
    // on a 1/200 lattice and the p-value jumps by ~0.08 mid-range, so the sup
    // distance of any p-value sample exceeds 0.06 there.
    let (n, m) = (1000, 1500);
    let mut null_p = Vec::with_capacity(1000);
    for _ in 0..1000 {
        let a: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.random()).collect();
        let d = ks_statistic(&EmpiricalCdf::new(&a).unwrap(), &EmpiricalCdf::new(&b).unwrap());
        null_p.push(ks_p_value(d, n, m).unwrap());
    }
    let dist = uniform_distance(&null_p);
    Verdict::new(
        worst <= 0.05 && dist < 0.06,
        format!(
            "max |asymptotic - permutation| {worst:.4} over 50 cases at n=m=200; \
             null p-value KS distance {dist:.4} over 1000 trials at n={n}, m={m}"
        ),
    )
}

fn c5_log_odds() -> Verdict {
    let two = LogOddsModel::new(1.0, 2, 1.0).unwrap();
    let e0 = log_odds_dependence(&[], &two).unwrap();
    let e1 = log_odds_dependence(&[0.3], &two).unwrap();
    let e2 = log_odds_dependence(&[0.1; 10], &two).unwrap();
    let want = 4.533_576_532_801_082;
    let examples = e0.abs() <= 1e-9 && e1.abs() <= 1e-9 && (e2 - want).abs() <= 1e-9;

    let model = LogOddsModel::new(1.0, 20, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mean = (0..100)
        .map(|_| {
            let d: Vec<f64> = (0..500).map(|_| rng.random()).collect();
            log_odds_dependence(&d, &model).unwrap()
        })
        .sum::<f64>()
        / 100.0;
    Verdict::new(
        examples && mean <= 0.5,
        format!("examples ({e0}, {e1}, {e2}); null mean log BF {mean:.3} at n=500 over 100 trials"),
    )
}

fn c6_diagnosis() -> Verdict {
    let train = planted_data(&PlantedSpec::reference(0));
    let test = planted_data(&PlantedSpec::reference(1));
    let spec = PlantedSpec::reference(1);
    let features = select_features(&train.dataset, &train.labels, &SelectionConfig::default()).unwrap();
    let model = fit_classifier(&train.dataset, &train.labels, &features).unwrap();
    let ds = &test.dataset;

    let mut hits = [0usize; 2];
    let mut totals = [0usize; 2];
    let mut identity_err: f64 = 0.0;
    for (row, &label) in ds.rows.iter().zip(&test.labels) {
        let c = classify(&model, row).unwrap();
        let k = label.is_violation() as usize;
        totals[k] += 1;
        hits[k] += (c.class == label) as usize;
        let s = signature(&model, row, 0.0).unwrap();
        let sum: f64 = s.attributions.iter().sum::<f64>() + model.log_prior_ratio();
        identity_err = identity_err.max((sum - c.log_odds).abs());
    }
    let balanced = (hits[0] as f64 / totals[0] as f64 + hits[1] as f64 / totals[1] as f64) / 2.0;

    let violations: Vec<usize> =
        (0..ds.len()).filter(|&i| test.labels[i] == SloState::Violation && test.causes[i].is_some()).collect();
    let signatures: Vec<Signature> =
        violations.iter().map(|&i| signature(&model, &ds.rows[i], ds.timestamps[i]).unwrap()).collect();

    let jaccards: Vec<f64> = violations
        .iter()
        .zip(&signatures)
        .map(|(&i, s)| {
            let found: BTreeSet<usize> = s.abnormal_metrics().into_iter().collect();
            let planted: BTreeSet<usize> = test.shifted[i].iter().copied().collect();
            jaccard(&found, &planted)
        })
        .collect();
    let mean_jaccard = jaccards.iter().sum::<f64>() / jaccards.len() as f64;
    let share_high = jaccards.iter().filter(|&&j| j >= 0.8).count() as f64 / jaccards.len() as f64;
    let (mut flagged, mut shifted) = (0, 0);
    for (&i, s) in violations.iter().zip(&signatures) {
        shifted += test.shifted[i].len();
        flagged += test.shifted[i].iter().filter(|&&f| s.abnormal[f]).count();
    }
    let driver_recall = flagged as f64 / shifted as f64;

    let k = spec.causes.len();
    let clusters = cluster_signatures(&signatures, k, 0).unwrap();
    let mut table: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (j, &i) in violations.iter().enumerate() {
        *table.entry(clusters[j]).or_default().entry(test.causes[i].unwrap()).or_default() += 1;
    }
    let purity = table.values().map(|c| c.values().max().unwrap()).sum::<usize>() as f64 / violations.len() as f64;

    let mut catalog = SignatureCatalog::default();
    for (j, &i) in violations.iter().enumerate().filter(|(j, _)| j % 2 == 0) {
        catalog.push(&signatures[j], format!("cause-{}", test.causes[i].unwrap()));
    }
    let mut relevant = 0;
    let mut retrieved = 0;
    for (j, &i) in violations.iter().enumerate().filter(|(j, _)| j % 2 == 1) {
        let want = format!("cause-{}", test.causes[i].unwrap());
        for hit in retrieve(&signatures[j], &catalog, 3).unwrap() {
            retrieved += 1;
            relevant += (hit.entry.annotation == want) as usize;
        }
    }
    let precision = relevant as f64 / retrieved as f64;

    Verdict::new(
        balanced >= 0.9 && identity_err <= 1e-9 && mean_jaccard >= 0.8 && purity >= 0.9 && precision >= 0.9,
        format!(
            "{} features; balanced accuracy {balanced:.4}; identity max error {identity_err:.1e}; \
             mean Jaccard {mean_jaccard:.3} over {} violations (share >= 0.8: {share_high:.3}, shifted-metric recall {driver_recall:.3}); \
             purity {purity:.4}; precision@3 {precision:.4}",
            features.len(),
            violations.len()
        ),
    )
}

fn c7_model_comparison() -> Verdict {
    let p = mcnemar_exact(0, 15);
    let a = vec![true; 15];
    let b = vec![false; 15];
    let cmp = compare_correctness(&a, &b, 0.05).unwrap();
    let big_a = vec![0.004; 1_000_000];
    let big_b = vec![0.0; 1_000_000];
    let t = mean_difference_test(&big_a, &big_b, 1.0, 0.05, 0.01).unwrap();
    let practical = t.significant && t.practically_significant == Some(false);
    Verdict::new(
        (p - 6.1e-5).abs() <= 1e-6 && cmp.significant && (cmp.p_value - p).abs() < 1e-15 && practical,
        format!(
            "McNemar(0, 15) p={p:.4e} significant={}; gap 0.004 at n=1e6: z={:.3}, p={:.4}, significant={}, \
             practically_significant={:?}",
            cmp.significant, t.statistic, t.p_value, t.significant, t.practically_significant
        ),
    )
}

fn c8_repair_loop() -> Verdict {
    let mut notes = Vec::new();

    let mut table_ok = 0;
    for a in Status::ALL {
        for b in Status::ALL {
            for c in Status::ALL {
                let rule = [a, b, c].contains(&Status::Error);
                table_ok += (error_predicate(&[a, b, c]) == rule) as usize;
            }
        }
    }
    notes.push(format!("truth table {table_ok}/27"));

    let window = 100;
    let mut stubborn = FaultModel { persistent_rate: 0.05, ..FaultModel::default() };
    stubborn.efficacy.reboot = 0.0;
    stubborn.efficacy.reimage = 0.0;
    for w in &mut stubborn.watchdogs {
        w.false_negative_rate = 0.0;
    }
    let bound = 3 * (stubborn.max_latency() + 1) + window;
    let mut worst_delay = 0;
    let mut replaced = 0;
    for seed in 0..20 {
        let log = simulate(1, &stubborn, &RepairPolicy::Escalation { window }, 400, seed).unwrap();
        let truth = log.truth.as_ref().unwrap();
        let onset = truth.iter().find(|t| t.persistent).map(|t| t.tick).unwrap();
        if let Some(r) = log.records.iter().find(|r| r.action == Some(RepairAction::Replace)) {
            replaced += 1;
            worst_delay = worst_delay.max(r.tick - onset);
        } else {
            worst_delay = u64::MAX;
        }
    }
    let replace_ok = replaced == 20 && worst_delay <= bound;
    notes.push(format!("replaced {replaced}/20, worst onset-to-Replace {worst_delay} ticks (bound {bound})"));

    let costs = CostModel::default();
    let persistent = FaultModel { persistent_rate: 0.01, ..FaultModel::default() };
    let transient = FaultModel { transient_rate: 0.02, ..FaultModel::default() };
    let mut avail_wins = 0;
    let mut cost_wins = 0;
    for seed in 0..20 {
        let run = |model: &FaultModel, policy: RepairPolicy| {
            evaluate_policy(&simulate(20, model, &policy, 500, seed).unwrap(), &costs)
        };
        let esc = run(&persistent, RepairPolicy::default());
        let idle = run(&persistent, RepairPolicy::AlwaysDoNothing);
        avail_wins += (esc.availability > idle.availability) as usize;
        let esc = run(&transient, RepairPolicy::default());
        let replace = run(&transient, RepairPolicy::AlwaysReplace);
        cost_wins += (esc.total_cost < replace.total_cost) as usize;
    }
    notes.push(format!("availability wins {avail_wins}/20, cost wins {cost_wins}/20"));

    let mut noisy = FaultModel { transient_rate: 0.01, persistent_rate: 0.001, ..FaultModel::default() };
    noisy.watchdogs = ["disk", "net", "svc"].iter().map(|id| WatchdogSpec::new(id, 0.10, 0.05)).collect();
    let log = simulate(20, &noisy, &RepairPolicy::default(), 1000, 8).unwrap();
    let estimates = estimate_watchdog_fpr(&log, 20);
    let fpr_ok = estimates.len() == 3
        && estimates.iter().all(|e| e.reports >= 10_000 && e.estimated_fpr.is_some_and(|r| (r - 0.10).abs() <= 0.02));
    let shown: Vec<String> = estimates
        .iter()
        .map(|e| format!("{}={:.4} ({} reports)", e.watchdog, e.estimated_fpr.unwrap_or(f64::NAN), e.reports))
        .collect();
    notes.push(format!("FPR estimates {}", shown.join(", ")));

    Verdict::new(table_ok == 27 && replace_ok && avail_wins == 20 && cost_wins == 20 && fpr_ok, notes.join("; "))
}

fn run(dir: &Path, args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_opsinfer")).current_dir(dir).args(args).output().expect("spawn CLI");
    if !out.status.success() {
        eprintln!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    }
    out.status.code().unwrap_or(-1)
}

fn generate_inputs(dir: &Path) -> bool {
    run(dir, &["gen-trace", "--seed", "0", "--out", "trace.log"]) == 0
        && run(dir, &["gen-metrics", "--preset", "reference", "--seed", "0", "--out", "metrics.csv"]) == 0
}

fn c9_forensic_speed() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    if !generate_inputs(d) {
        return Verdict::new(false, "input generation failed");
    }
    let start = Instant::now();
    let discover = run(d, &["discover", "trace.log", "--out", "disc"]);
    let diagnose =
        run(d, &["diagnose", "--metrics", "metrics.csv", "--slo", "200", "--action", "cluster", "--out", "diag"]);
    let elapsed = start.elapsed();
    Verdict::new(
        discover == 0 && diagnose == 0 && elapsed < Duration::from_secs(300),
        format!("discover exit {discover}, diagnose exit {diagnose}, {:.2}s total", elapsed.as_secs_f64()),
    )
}

fn pipeline(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let steps: [&[&str]; 7] = [
        &["discover", "trace.log", "--out", "disc", "--format", "dot", "--method", "both"],
        &["discover", "trace.log", "--out", "disc-csv", "--format", "csv"],
        &["diagnose", "--metrics", "metrics.csv", "--slo", "200", "--action", "cluster", "--out", "diag"],
        &["diagnose", "--metrics", "metrics.csv", "--slo", "200", "--action", "retrieve"],
        &["repair-sim", "--seed", "3", "--machines", "10", "--ticks", "500", "--fp-rate", "0.05", "--out", "fleet.log"],
        &["repair-mine", "--log", "fleet.log", "--truth", "fleet.log.truth", "--out", "mined"],
        &["stats", "fdr", "--tests", "100", "--level", "0.05"],
    ];
    assert!(generate_inputs(dir));
    for (i, step) in steps.iter().enumerate() {
        let mut args = step.to_vec();
        if i == 3 {
            args.extend(["--catalog", "diag/catalog.ndjson", "--out", "retr"]);
        }
        assert_eq!(run(dir, &args), 0, "{args:?}");
    }
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in std::fs::read_dir(&p).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn c10_determinism() -> Verdict {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline(a.path());
    let second = pipeline(b.path());
    let differing: Vec<&String> = first
        .keys()
        .filter(|k| first.get(*k) != second.get(*k))
        .chain(second.keys().filter(|k| !first.contains_key(*k)))
        .collect();
    Verdict::new(
        differing.is_empty() && first.len() >= 15,
        format!("{} report files compared, differing: {differing:?}", first.len()),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("FDR arithmetic", 5, c1_fdr_arithmetic),
        ("FDR control", 120, c2_fdr_control),
        ("dependency recovery", 300, c3_dependency_recovery),
        ("KS correctness", 180, c4_ks_correctness),
        ("log-odds test", 60, c5_log_odds),
        ("diagnosis", 180, c6_diagnosis),
        ("model comparison", 10, c7_model_comparison),
        ("repair loop", 120, c8_repair_loop),
        ("forensic speed", 300, c9_forensic_speed),
        ("determinism", 300, c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.into_iter().enumerate() {
        let v = timed(Duration::from_secs(budget), f);
        println!("criterion {:>2} {name}: {} ({})", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += !v.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
