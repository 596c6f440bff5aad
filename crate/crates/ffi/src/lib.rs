//! C ABI over `opsinfer`.
//!
//! Every fallible function returns an [`OpsStatus`] and writes its result
//! through an out-pointer. On failure a description is available from
//! [`ops_last_error`] on the same thread. Handles returned through
//! out-pointers are owned by the caller and released with the matching
//! `*_free` function; passing NULL to a `*_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use opsinfer::discovery::{
    build_graph, export_graph, local_dependencies, DependencyGraph, DiscoveryConfig, GraphFormat, Method,
};
use opsinfer::repair::{error_predicate, escalation_policy, RepairAction, Status};
use opsinfer::stats::{bh_select, expected_false_positives, ks_test, log_odds_dependence, LogOddsModel, RejectionSet};
use opsinfer::trace::{parse_trace_str, HostTrace};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    /// A Rust panic was caught at the boundary.
    Internal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpsMethod {
    Ks = 0,
    LogOdds = 1,
    Both = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpsGraphFormat {
    Dot = 0,
    Json = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpsRepairAction {
    Reboot = 0,
    ReImage = 1,
    Replace = 2,
    DoNothing = 3,
}

/// Watchdog status codes accepted by [`ops_error_predicate`].
pub const OPS_WATCHDOG_OK: i32 = 0;
pub const OPS_WATCHDOG_WARNING: i32 = 1;
pub const OPS_WATCHDOG_ERROR: i32 = 2;

pub struct OpsRejectionSet(RejectionSet);

pub struct OpsTrace(HostTrace);

pub struct OpsGraph(DependencyGraph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(text).expect("nul bytes removed")));
}

fn fail(status: OpsStatus, message: impl Into<String>) -> OpsStatus {
    set_error(message);
    status
}

/// Runs `f`, converting a panic into [`OpsStatus::Internal`].
fn guard(f: impl FnOnce() -> OpsStatus) -> OpsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(OpsStatus::Internal, "internal error"),
    }
}

/// # Safety
/// `data` must be NULL or point to `len` readable values.
unsafe fn slice<'a, T>(data: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if data.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(data, len))
    }
}

fn into_handle<T>(out: *mut *mut T, value: T) {
    // SAFETY: callers check `out` for NULL first.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ops_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ops_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ops_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `m * p`: expected false positives among `m` tests at per-test level `p`.
#[no_mangle]
pub extern "C" fn ops_expected_false_positives(m: usize, p: f64) -> f64 {
    expected_false_positives(m, p)
}

/// Benjamini-Hochberg selection at FDR level `alpha`.
///
/// # Safety
/// `p_values` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_bh_select(
    p_values: *const f64,
    len: usize,
    alpha: f64,
    out: *mut *mut OpsRejectionSet,
) -> OpsStatus {
    guard(|| {
        let Some(p) = slice(p_values, len) else { return fail(OpsStatus::NullPointer, "p_values is NULL") };
        if out.is_null() {
            return fail(OpsStatus::NullPointer, "out is NULL");
        }
        match bh_select(p, alpha) {
            Ok(set) => {
                into_handle(out, OpsRejectionSet(set));
                OpsStatus::Ok
            }
            Err(e) => fail(OpsStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Number of rejected hypotheses; 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ops_rejection_set_count(set: *const OpsRejectionSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.n_rejected())
}

/// Largest rejected p-value, or 0 when nothing is rejected.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ops_rejection_set_threshold(set: *const OpsRejectionSet) -> f64 {
    set.as_ref().map_or(0.0, |s| s.0.threshold)
}

/// Whether hypothesis `index` (input order) is rejected.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ops_rejection_set_is_rejected(set: *const OpsRejectionSet, index: usize) -> bool {
    set.as_ref().is_some_and(|s| s.0.is_rejected(index))
}

/// BH-adjusted p-value of hypothesis `index`.
///
/// # Safety
/// `set` must be NULL or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_rejection_set_q_value(
    set: *const OpsRejectionSet,
    index: usize,
    out: *mut f64,
) -> OpsStatus {
    guard(|| {
        let (Some(s), false) = (set.as_ref(), out.is_null()) else {
            return fail(OpsStatus::NullPointer, "set or out is NULL");
        };
        match s.0.q_values.get(index) {
            Some(&q) => {
                *out = q;
                OpsStatus::Ok
            }
            None => fail(OpsStatus::InvalidArgument, format!("index {index} out of range for {} hypotheses", s.0.m)),
        }
    })
}

/// # Safety
/// `set` must be NULL or a handle from [`ops_bh_select`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ops_rejection_set_free(set: *mut OpsRejectionSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
///
/// # Safety
/// `a` and `b` must point to `n_a` and `n_b` doubles; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_ks_test(
    a: *const f64,
    n_a: usize,
    b: *const f64,
    n_b: usize,
    out_statistic: *mut f64,
    out_p_value: *mut f64,
) -> OpsStatus {
    guard(|| {
        let (Some(a), Some(b)) = (slice(a, n_a), slice(b, n_b)) else {
            return fail(OpsStatus::NullPointer, "sample pointer is NULL");
        };
        if out_statistic.is_null() || out_p_value.is_null() {
            return fail(OpsStatus::NullPointer, "output pointer is NULL");
        }
        match ks_test(a, b, 0.05) {
            Ok(t) => {
                *out_statistic = t.statistic;
                *out_p_value = t.p_value;
                OpsStatus::Ok
            }
            Err(e) => fail(OpsStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Natural-log Bayes factor for "delays are non-uniform on `[0, horizon]`".
///
/// # Safety
/// `delays` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_log_odds_dependence(
    delays: *const f64,
    len: usize,
    horizon: f64,
    bins: usize,
    dirichlet_alpha: f64,
    out: *mut f64,
) -> OpsStatus {
    guard(|| {
        let Some(d) = slice(delays, len) else { return fail(OpsStatus::NullPointer, "delays is NULL") };
        if out.is_null() {
            return fail(OpsStatus::NullPointer, "out is NULL");
        }
        let result = LogOddsModel::new(horizon, bins, dirichlet_alpha).and_then(|m| log_odds_dependence(d, &m));
        match result {
            Ok(v) => {
                *out = v;
                OpsStatus::Ok
            }
            Err(e) => fail(OpsStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Parses a single-host trace from NUL-terminated text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_trace_parse(text: *const c_char, out: *mut *mut OpsTrace) -> OpsStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(OpsStatus::NullPointer, "text or out is NULL");
        }
        let Ok(s) = CStr::from_ptr(text).to_str() else { return fail(OpsStatus::Parse, "trace is not UTF-8") };
        match parse_trace_str(s) {
            Ok(t) => {
                into_handle(out, OpsTrace(t));
                OpsStatus::Ok
            }
            Err(e) => fail(OpsStatus::Parse, e.to_string()),
        }
    })
}

/// Number of distinct channels; 0 for NULL.
///
/// # Safety
/// `trace` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ops_trace_channel_count(trace: *const OpsTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.channels.len())
}

/// Number of events after de-duplication; 0 for NULL.
///
/// # Safety
/// `trace` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ops_trace_event_count(trace: *const OpsTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.n_events())
}

/// # Safety
/// `trace` must be NULL or a handle from [`ops_trace_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ops_trace_free(trace: *mut OpsTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Tests every channel pair of one host and builds its dependency graph.
/// Other settings take their library defaults.
///
/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_discover(
    trace: *const OpsTrace,
    alpha: f64,
    horizon: f64,
    seed: u64,
    method: OpsMethod,
    out: *mut *mut OpsGraph,
) -> OpsStatus {
    guard(|| {
        let (Some(t), false) = (trace.as_ref(), out.is_null()) else {
            return fail(OpsStatus::NullPointer, "trace or out is NULL");
        };
        let method = match method {
            OpsMethod::Ks => Method::Ks,
            OpsMethod::LogOdds => Method::LogOdds,
            OpsMethod::Both => Method::Both,
        };
        let config = DiscoveryConfig { alpha, horizon, seed, method, ..DiscoveryConfig::default() };
        if let Err(e) = config.validate() {
            return fail(OpsStatus::InvalidArgument, e);
        }
        let results = local_dependencies(&t.0, &config);
        into_handle(out, OpsGraph(build_graph([(t.0.host.as_str(), results.as_slice())])));
        OpsStatus::Ok
    })
}

/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ops_graph_node_count(graph: *const OpsGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.nodes.len())
}

/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ops_graph_edge_count(graph: *const OpsGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Renders the graph; release the string with [`ops_string_free`].
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_graph_export(
    graph: *const OpsGraph,
    format: OpsGraphFormat,
    out: *mut *mut c_char,
) -> OpsStatus {
    guard(|| {
        let (Some(g), false) = (graph.as_ref(), out.is_null()) else {
            return fail(OpsStatus::NullPointer, "graph or out is NULL");
        };
        let format = match format {
            OpsGraphFormat::Dot => GraphFormat::Dot,
            OpsGraphFormat::Json => GraphFormat::Json,
        };
        let text = export_graph(&g.0, format);
        match CString::new(text) {
            Ok(s) => {
                *out = s.into_raw();
                OpsStatus::Ok
            }
            Err(_) => fail(OpsStatus::Internal, "graph text contains a NUL byte"),
        }
    })
}

/// # Safety
/// `graph` must be NULL or a handle from [`ops_discover`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ops_graph_free(graph: *mut OpsGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Whether any of `len` watchdog statuses (`OPS_WATCHDOG_*`) is an error.
///
/// # Safety
/// `statuses` must point to `len` ints; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_error_predicate(statuses: *const i32, len: usize, out: *mut bool) -> OpsStatus {
    guard(|| {
        let Some(codes) = slice(statuses, len) else { return fail(OpsStatus::NullPointer, "statuses is NULL") };
        if out.is_null() {
            return fail(OpsStatus::NullPointer, "out is NULL");
        }
        let mut parsed = Vec::with_capacity(codes.len());
        for (i, &c) in codes.iter().enumerate() {
            parsed.push(match c {
                OPS_WATCHDOG_OK => Status::Ok,
                OPS_WATCHDOG_WARNING => Status::Warning,
                OPS_WATCHDOG_ERROR => Status::Error,
                other => return fail(OpsStatus::InvalidArgument, format!("status {i}: unknown code {other}")),
            });
        }
        *out = error_predicate(&parsed);
        OpsStatus::Ok
    })
}

/// Escalation ladder: with `repair_ticks` the ticks of earlier repairs, returns
/// Reboot, ReImage or Replace for 0, 1 or more repairs within `window` of
/// `now`, and DoNothing when the machine is not in error.
///
/// # Safety
/// `repair_ticks` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ops_escalation_policy(
    repair_ticks: *const u64,
    len: usize,
    now: u64,
    window: u64,
    in_error: bool,
    out: *mut OpsRepairAction,
) -> OpsStatus {
    guard(|| {
        let Some(ticks) = slice(repair_ticks, len) else { return fail(OpsStatus::NullPointer, "repair_ticks is NULL") };
        if out.is_null() {
            return fail(OpsStatus::NullPointer, "out is NULL");
        }
        let history: Vec<(u64, RepairAction)> = ticks.iter().map(|&t| (t, RepairAction::Reboot)).collect();
        *out = match escalation_policy(&history, now, window, in_error) {
            RepairAction::Reboot => OpsRepairAction::Reboot,
            RepairAction::ReImage => OpsRepairAction::ReImage,
            RepairAction::Replace => OpsRepairAction::Replace,
            RepairAction::DoNothing => OpsRepairAction::DoNothing,
        };
        OpsStatus::Ok
    })
}
