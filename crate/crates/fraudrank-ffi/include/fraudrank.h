#ifndef FRAUDRANK_H
#define FRAUDRANK_H

/* Generated by cbindgen from the fraudrank-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call in this API.
typedef enum {
  // The call succeeded.
  FR_STATUS_OK = 0,
  // A required pointer argument was null.
  FR_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  FR_STATUS_UTF8 = 2,
  // The underlying file could not be read.
  FR_STATUS_IO = 3,
  // The input was syntactically or semantically malformed.
  FR_STATUS_PARSE = 4,
  // A parameter was outside its legal range.
  FR_STATUS_INVALID_ARGUMENT = 5,
  // Power iteration hit the iteration cap before reaching tolerance.
  FR_STATUS_NOT_CONVERGED = 6,
  // The metric needs both classes but the labels hold only one.
  FR_STATUS_SINGLE_CLASS = 7,
  // An internal invariant failed; file a bug with the error message.
  FR_STATUS_INTERNAL = 8,
} FrStatus;

// Edge weighting used by the random walk.
typedef enum {
  // Transition probability proportional to transaction count.
  FR_WEIGHT_MODE_COUNT = 0,
  // Proportional to summed amount.
  FR_WEIGHT_MODE_AMOUNT = 1,
  // Uniform over distinct out-neighbors.
  FR_WEIGHT_MODE_UNWEIGHTED = 2,
} FrWeightMode;

// Opaque handle to a directed, weighted account graph.
typedef struct FrGraph FrGraph;

// Opaque handle to an in-memory transaction ledger.
typedef struct FrLedger FrLedger;

// Opaque handle to converged per-account exposure scores.
typedef struct FrScores FrScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the message of the most recent failure on this thread, as a
// NUL-terminated string. The pointer stays valid until the next
// fraudrank call on the same thread. Never null; empty when no call
// has failed yet.
const char *fr_last_error(void);

// Parses a ledger CSV (the 15-column schema) into a new handle.
//
// On success writes the handle to `out_ledger` and returns
// `FR_STATUS_OK`; the caller owns the handle and must release it with
// `fr_ledger_free`.
//
// # Safety
//
// `path` must be a valid NUL-terminated string; `out_ledger` must
// point to writable storage for one pointer.
FrStatus fr_ledger_load_csv(const char *path, FrLedger **out_ledger);

// Generates a deterministic synthetic ledger with injected fraud
// rings (all other generator settings at their defaults).
//
// # Safety
//
// `out_ledger` must point to writable storage for one pointer.
FrStatus fr_ledger_synthesize(uint64_t seed,
                              size_t n_accounts,
                              size_t n_transactions,
                              uint32_t span_days,
                              double fraud_rate,
                              size_t n_rings,
                              size_t ring_size,
                              FrLedger **out_ledger);

// Copies the rows whose status equals `status` (exact, case-sensitive)
// into a new ledger handle.
//
// # Safety
//
// `ledger` must be a live handle; `status` a valid NUL-terminated
// string; `out_ledger` writable storage for one pointer.
FrStatus fr_ledger_filter_status(const FrLedger *ledger, const char *status, FrLedger **out_ledger);

// Number of rows in the ledger; 0 for a null handle.
//
// # Safety
//
// `ledger` must be null or a live handle.
size_t fr_ledger_len(const FrLedger *ledger);

// Releases a ledger handle. Null is a no-op.
//
// # Safety
//
// `ledger` must be null or a handle returned by this API, not yet
// freed; it must not be used afterwards.
void fr_ledger_free(FrLedger *ledger);

// Builds the directed weighted account graph of a ledger.
//
// # Safety
//
// `ledger` must be a live handle; `out_graph` writable storage for one
// pointer.
FrStatus fr_graph_build(const FrLedger *ledger, FrGraph **out_graph);

// Number of accounts (nodes); 0 for a null handle.
//
// # Safety
//
// `graph` must be null or a live handle.
size_t fr_graph_n_nodes(const FrGraph *graph);

// Number of aggregated directed edges; 0 for a null handle.
//
// # Safety
//
// `graph` must be null or a live handle.
size_t fr_graph_n_edges(const FrGraph *graph);

// Releases a graph handle. Null is a no-op.
//
// # Safety
//
// `graph` must be null or a handle returned by this API, not yet
// freed; it must not be used afterwards.
void fr_graph_free(FrGraph *graph);

// Runs label-personalized PageRank over `graph`, seeding the
// teleportation distribution from the fraud labels in `ledger`
// (per-account label averages; uniform when no labels are set).
//
// Typical parameters: `alpha` 0.85, `tol` 1e-9, `max_iter` 1000.
//
// # Safety
//
// `graph` and `ledger` must be live handles; `out_scores` writable
// storage for one pointer.
FrStatus fr_exposure_compute(const FrGraph *graph,
                             const FrLedger *ledger,
                             double alpha,
                             double tol,
                             size_t max_iter,
                             FrWeightMode weight_mode,
                             FrScores **out_scores);

// Number of scored accounts; 0 for a null handle.
//
// # Safety
//
// `scores` must be null or a live handle.
size_t fr_scores_len(const FrScores *scores);

// Power-iteration count actually used; 0 for a null handle.
//
// # Safety
//
// `scores` must be null or a live handle.
size_t fr_scores_iterations(const FrScores *scores);

// Whether the iteration reached its tolerance; false for null.
//
// # Safety
//
// `scores` must be null or a live handle.
bool fr_scores_converged(const FrScores *scores);

// Looks up one account's exposure score. Accounts absent from the
// scored graph read as 0.0 ("no known exposure"), which is a success.
//
// # Safety
//
// `scores` must be a live handle; `out_score` writable storage for one
// double.
FrStatus fr_scores_account(const FrScores *scores, int64_t account, double *out_score);

// Releases a scores handle. Null is a no-op.
//
// # Safety
//
// `scores` must be null or a handle returned by this API, not yet
// freed; it must not be used afterwards.
void fr_scores_free(FrScores *scores);

// Tie-aware ROC AUC of `len` score/label pairs (labels 0 or 1).
//
// # Safety
//
// `scores` and `labels` must point to `len` readable elements each;
// `out_auc` must be writable storage for one double.
FrStatus fr_roc_auc(const double *scores, const uint8_t *labels, size_t len, double *out_auc);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRAUDRANK_H */
