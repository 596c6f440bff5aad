use std::path::Path;
use std::process::{Command, Output, Stdio};

use std::io::Write;

fn opsinfer(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opsinfer")).current_dir(dir).args(args).output().unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_opsinfer"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const ONE_DEP: &str = "\
host=web duration=900 seed=5
channel=in/http/client rate=1
channel=in/admin/ops rate=0.5
channel=out/sql/db rate=0.5
channel=out/cache/kv rate=0.5
dep=in/http/client->out/sql/db mean=0.05 prob=0.9
";

#[test]
fn single_dependency_yields_two_edges() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("spec.txt"), ONE_DEP).unwrap();
    assert_eq!(code(&opsinfer(d, &["gen-trace", "--spec", "spec.txt", "--out", "web.log"])), 0);
    assert!(d.join("web.log.truth").exists());
    let out = opsinfer(d, &["discover", "web.log", "--out", "graph"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let graph =
        opsinfer::discovery::import_graph_json(&std::fs::read_to_string(d.join("graph/graph.json")).unwrap()).unwrap();
    let edges: Vec<String> = graph.edges.keys().map(|k| format!("{}-{}->{}", k.from, k.service, k.to)).collect();
    assert_eq!(edges, ["client-http->web", "web-sql->db"]);

    let pairs = std::fs::read_to_string(d.join("graph/pairs.csv")).unwrap();
    assert!(pairs.starts_with("# opsinfer discover"));
    assert_eq!(pairs.lines().nth(1).unwrap(), opsinfer::discovery::PAIR_TABLE_HEADER);
    assert_eq!(pairs.lines().count(), 2 + 4);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("graph/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["edges"], 2);
}

#[test]
fn dot_output_and_method_both() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("spec.txt"), ONE_DEP).unwrap();
    opsinfer(d, &["gen-trace", "--spec", "spec.txt", "--out", "web.log"]);
    let out = opsinfer(d, &["discover", "web.log", "--method", "both", "--format", "dot", "--out", "g"]);
    assert_eq!(code(&out), 0);
    let dot = std::fs::read_to_string(d.join("g/graph.dot")).unwrap();
    assert!(dot.contains("digraph"));
    assert_eq!(dot.matches("->").count(), 2);
}

#[test]
fn host_without_testable_pairs_warns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("a.log"), "ts=1 host=a remote=x service=s dir=in\nts=2 host=a remote=y service=t dir=out\n")
        .unwrap();
    let out = opsinfer(d, &["discover", "a.log", "--out", "o"]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());
}

#[test]
fn duplicate_host_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("spec.txt"), ONE_DEP).unwrap();
    opsinfer(d, &["gen-trace", "--spec", "spec.txt", "--out", "web.log"]);
    assert_eq!(code(&opsinfer(d, &["discover", "web.log", "web.log", "--out", "o"])), 2);
}

#[test]
fn diagnose_cluster_timeline_has_k_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&opsinfer(d, &["gen-metrics", "--preset", "reference", "--seed", "2", "--out", "m.csv"])), 0);
    let out = opsinfer(d, &["diagnose", "--metrics", "m.csv", "--slo", "200", "--action", "cluster", "--out", "o"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let timeline = std::fs::read_to_string(d.join("o/timeline.csv")).unwrap();
    let mut lines = timeline.lines();
    assert!(lines.next().unwrap().starts_with("# opsinfer diagnose cluster"));
    assert_eq!(lines.next().unwrap(), "ts,art_ms,slo_state,cluster_id");
    let mut ids = std::collections::BTreeSet::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 4);
        match fields[2] {
            "violation" => {
                ids.insert(fields[3].to_string());
            }
            "compliant" => assert_eq!(fields[3], ""),
            other => panic!("unexpected state {other}"),
        }
    }
    assert_eq!(ids.len(), 3);

    let model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("o/model.json")).unwrap()).unwrap();
    assert!(model["training_fit"]["balanced_accuracy"].as_f64().unwrap() > 0.9);

    let out = opsinfer(
        d,
        &[
            "diagnose",
            "--metrics",
            "m.csv",
            "--slo",
            "200",
            "--action",
            "retrieve",
            "--catalog",
            "o/catalog.ndjson",
            "--out",
            "r",
        ],
    );
    assert_eq!(code(&out), 0);
    let retrieval = std::fs::read_to_string(d.join("r/retrieval.csv")).unwrap();
    assert!(retrieval.lines().any(|l| l == "ts,rank,catalog_index,catalog_ts,distance,annotation"));
}

#[test]
fn diagnose_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    opsinfer(d, &["gen-metrics", "--preset", "small", "--out", "m.csv"]);
    let retrieve = ["diagnose", "--metrics", "m.csv", "--slo", "200", "--action", "retrieve", "--out", "o"];
    assert_eq!(code(&opsinfer(d, &retrieve)), 2);
    // threshold above every response time leaves a single class
    let single = ["diagnose", "--metrics", "m.csv", "--slo", "1e9", "--out", "o"];
    assert_eq!(code(&opsinfer(d, &single)), 2);
    assert_eq!(code(&opsinfer(d, &["diagnose", "--metrics", "missing.csv", "--slo", "200", "--out", "o"])), 2);
}

#[test]
fn repair_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sim = ["repair-sim", "--seed", "4", "--machines", "8", "--ticks", "300", "--fp-rate", "0.1", "--out", "r.log"];
    assert_eq!(code(&opsinfer(d, &sim)), 0);
    let first = std::fs::read(d.join("r.log")).unwrap();
    assert_eq!(code(&opsinfer(d, &sim)), 0);
    assert_eq!(first, std::fs::read(d.join("r.log")).unwrap());

    let out = opsinfer(d, &["repair-mine", "--log", "r.log", "--truth", "r.log.truth", "--out", "mined"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let policy: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("mined/policy.json")).unwrap()).unwrap();
    let availability = policy["metrics"]["availability"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&availability));
    assert_eq!(policy["metrics"]["machine_ticks"], 8 * 300);
    let watchdogs = std::fs::read_to_string(d.join("mined/watchdogs.csv")).unwrap();
    assert_eq!(watchdogs.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3);
}

#[test]
fn repair_mine_missing_log() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&opsinfer(dir.path(), &["repair-mine", "--log", "nope.log", "--out", "o"])), 2);
}

#[test]
fn stats_fdr_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = opsinfer(dir.path(), &["stats", "fdr", "--tests", "10000", "--level", "0.05", "--rejections", "1000"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("expected_false_positives=500\n"), "{text}");
    assert!(text.contains("expected_false_proportion=0.5\n"), "{text}");
}

#[test]
fn stats_bh_reads_stdin() {
    let out = with_stdin(&["stats", "bh", "--alpha", "0.05"], "0.001 0.008 0.039 0.041 0.27 0.60\n");
    assert_eq!(code(&out), 0);
    let rejected: Vec<String> = stdout(&out)
        .lines()
        .filter(|l| l.ends_with(",true"))
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(rejected, ["0.001", "0.008"]);
    assert_eq!(code(&with_stdin(&["stats", "bh"], "0.5 nope\n")), 2);
}

#[test]
fn stats_mcnemar() {
    let dir = tempfile::tempdir().unwrap();
    let out = opsinfer(dir.path(), &["stats", "mcnemar", "--n01", "0", "--n10", "15"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("p_value=0.000061035156"), "{}", stdout(&out));
}

#[test]
fn usage_and_help_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&opsinfer(dir.path(), &["--help"])), 0);
    assert_eq!(code(&opsinfer(dir.path(), &["no-such-command"])), 2);
    assert_eq!(code(&opsinfer(dir.path(), &["repair-sim", "--policy", "sometimes", "--out", "x"])), 2);
}
