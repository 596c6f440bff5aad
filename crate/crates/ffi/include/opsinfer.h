#ifndef OPSINFER_H
#define OPSINFER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Watchdog status codes accepted by [`ops_error_predicate`].
#define OPS_WATCHDOG_OK 0

#define OPS_WATCHDOG_WARNING 1

#define OPS_WATCHDOG_ERROR 2

typedef enum OpsStatus {
  OPS_STATUS_OK = 0,
  OPS_STATUS_NULL_POINTER = 1,
  OPS_STATUS_INVALID_ARGUMENT = 2,
  OPS_STATUS_PARSE = 3,
  // A Rust panic was caught at the boundary.
  OPS_STATUS_INTERNAL = 4,
} OpsStatus;

typedef enum OpsMethod {
  OPS_METHOD_KS = 0,
  OPS_METHOD_LOG_ODDS = 1,
  OPS_METHOD_BOTH = 2,
} OpsMethod;

typedef enum OpsGraphFormat {
  OPS_GRAPH_FORMAT_DOT = 0,
  OPS_GRAPH_FORMAT_JSON = 1,
} OpsGraphFormat;

typedef enum OpsRepairAction {
  OPS_REPAIR_ACTION_REBOOT = 0,
  OPS_REPAIR_ACTION_RE_IMAGE = 1,
  OPS_REPAIR_ACTION_REPLACE = 2,
  OPS_REPAIR_ACTION_DO_NOTHING = 3,
} OpsRepairAction;

typedef struct OpsGraph OpsGraph;

typedef struct OpsRejectionSet OpsRejectionSet;

typedef struct OpsTrace OpsTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *ops_last_error(void);

// Library version as a static NUL-terminated string.
const char *ops_version(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must be NULL or a string returned by this library and not yet freed.
void ops_string_free(char *s);

// `m * p`: expected false positives among `m` tests at per-test level `p`.
double ops_expected_false_positives(size_t m, double p);

// Benjamini-Hochberg selection at FDR level `alpha`.
//
// # Safety
// `p_values` must point to `len` doubles; `out` must be writable.
enum OpsStatus ops_bh_select(const double *p_values,
                             size_t len,
                             double alpha,
                             struct OpsRejectionSet **out);

// Number of rejected hypotheses; 0 for NULL.
//
// # Safety
// `set` must be NULL or a live handle.
size_t ops_rejection_set_count(const struct OpsRejectionSet *set);

// Largest rejected p-value, or 0 when nothing is rejected.
//
// # Safety
// `set` must be NULL or a live handle.
double ops_rejection_set_threshold(const struct OpsRejectionSet *set);

// Whether hypothesis `index` (input order) is rejected.
//
// # Safety
// `set` must be NULL or a live handle.
bool ops_rejection_set_is_rejected(const struct OpsRejectionSet *set, size_t index);

// BH-adjusted p-value of hypothesis `index`.
//
// # Safety
// `set` must be NULL or a live handle; `out` must be writable.
enum OpsStatus ops_rejection_set_q_value(const struct OpsRejectionSet *set,
                                         size_t index,
                                         double *out);

// # Safety
// `set` must be NULL or a handle from [`ops_bh_select`] not yet freed.
void ops_rejection_set_free(struct OpsRejectionSet *set);

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
//
// # Safety
// `a` and `b` must point to `n_a` and `n_b` doubles; out-pointers must be writable.
enum OpsStatus ops_ks_test(const double *a,
                           size_t n_a,
                           const double *b,
                           size_t n_b,
                           double *out_statistic,
                           double *out_p_value);

// Natural-log Bayes factor for "delays are non-uniform on `[0, horizon]`".
//
// # Safety
// `delays` must point to `len` doubles; `out` must be writable.
enum OpsStatus ops_log_odds_dependence(const double *delays,
                                       size_t len,
                                       double horizon,
                                       size_t bins,
                                       double dirichlet_alpha,
                                       double *out);

// Parses a single-host trace from NUL-terminated text.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum OpsStatus ops_trace_parse(const char *text, struct OpsTrace **out);

// Number of distinct channels; 0 for NULL.
//
// # Safety
// `trace` must be NULL or a live handle.
size_t ops_trace_channel_count(const struct OpsTrace *trace);

// Number of events after de-duplication; 0 for NULL.
//
// # Safety
// `trace` must be NULL or a live handle.
size_t ops_trace_event_count(const struct OpsTrace *trace);

// # Safety
// `trace` must be NULL or a handle from [`ops_trace_parse`] not yet freed.
void ops_trace_free(struct OpsTrace *trace);

// Tests every channel pair of one host and builds its dependency graph.
// Other settings take their library defaults.
//
// # Safety
// `trace` must be a live handle; `out` must be writable.
enum OpsStatus ops_discover(const struct OpsTrace *trace,
                            double alpha,
                            double horizon,
                            uint64_t seed,
                            enum OpsMethod method,
                            struct OpsGraph **out);

// # Safety
// `graph` must be NULL or a live handle.
size_t ops_graph_node_count(const struct OpsGraph *graph);

// # Safety
// `graph` must be NULL or a live handle.
size_t ops_graph_edge_count(const struct OpsGraph *graph);

// Renders the graph; release the string with [`ops_string_free`].
//
// # Safety
// `graph` must be a live handle; `out` must be writable.
enum OpsStatus ops_graph_export(const struct OpsGraph *graph,
                                enum OpsGraphFormat format,
                                char **out);

// # Safety
// `graph` must be NULL or a handle from [`ops_discover`] not yet freed.
void ops_graph_free(struct OpsGraph *graph);

// Whether any of `len` watchdog statuses (`OPS_WATCHDOG_*`) is an error.
//
// # Safety
// `statuses` must point to `len` ints; `out` must be writable.
enum OpsStatus ops_error_predicate(const int32_t *statuses, size_t len, bool *out);

// Escalation ladder: with `repair_ticks` the ticks of earlier repairs, returns
// Reboot, ReImage or Replace for 0, 1 or more repairs within `window` of
// `now`, and DoNothing when the machine is not in error.
//
// # Safety
// `repair_ticks` must point to `len` values; `out` must be writable.
enum OpsStatus ops_escalation_policy(const uint64_t *repair_ticks,
                                     size_t len,
                                     uint64_t now,
                                     uint64_t window,
                                     bool in_error,
                                     enum OpsRepairAction *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPSINFER_H */
