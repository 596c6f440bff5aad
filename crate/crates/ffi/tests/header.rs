use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("opsinfer.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).expect("header is generated by the build script");
    for name in [
        "typedef struct OpsRejectionSet OpsRejectionSet;",
        "typedef struct OpsTrace OpsTrace;",
        "typedef struct OpsGraph OpsGraph;",
        "OPS_STATUS_NULL_POINTER = 1",
        "OPS_STATUS_INTERNAL = 4",
        "#define OPS_WATCHDOG_ERROR 2",
        "ops_last_error(void)",
        "ops_bh_select(",
        "ops_rejection_set_free(",
        "ops_ks_test(",
        "ops_log_odds_dependence(",
        "ops_trace_parse(",
        "ops_discover(",
        "ops_graph_export(",
        "ops_string_free(",
        "ops_error_predicate(",
        "ops_escalation_policy(",
    ] {
        assert!(text.contains(name), "header lacks `{name}`");
    }
}

/// Compiles and runs a small C program against the header and static library
/// when a C compiler is on PATH.
#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libopsinfer_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "opsinfer.h"

int main(void) {
    double p[4] = {0.01, 0.04, 0.03, 0.005};
    OpsRejectionSet *set = NULL;
    if (ops_bh_select(p, 4, 0.05, &set) != OPS_STATUS_OK) return 1;
    if (ops_rejection_set_count(set) != 4) return 2;
    ops_rejection_set_free(set);
    if (ops_bh_select(NULL, 4, 0.05, &set) != OPS_STATUS_NULL_POINTER) return 3;
    if (ops_last_error() == NULL) return 4;
    int codes[3] = {OPS_WATCHDOG_OK, OPS_WATCHDOG_WARNING, OPS_WATCHDOG_ERROR};
    bool in_error = false;
    if (ops_error_predicate(codes, 3, &in_error) != OPS_STATUS_OK || !in_error) return 5;
    printf("%g\n", ops_expected_false_positives(10000, 0.05));
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "500");
}
