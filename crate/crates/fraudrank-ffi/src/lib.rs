//! C ABI for the fraudrank transaction-scoring library.
//!
//! The surface follows the usual C embedding conventions:
//!
//! * **Opaque handles** (`FrLedger`, `FrGraph`, `FrScores`) own their
//!   Rust data; create them through `fr_*` constructors and release them
//!   with the matching `fr_*_free`. Handles are independent — freeing a
//!   graph never invalidates scores derived from it.
//! * **Status codes**: every fallible call returns [`FrStatus`];
//!   `FR_STATUS_OK` (0) means success. On failure a human-readable
//!   message is stored per thread and readable via [`fr_last_error`].
//! * **No unwinding**: panics are caught at the boundary and reported
//!   as `FR_STATUS_INTERNAL`.
//!
//! The generated header lives at `include/fraudrank.h`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fraudrank::evaluation::{roc_auc, EvalError};
use fraudrank::exposure::{
    build_personalization, compute_ppr, ExposureError, PprParams, WeightMode,
};
use fraudrank::graph::{build_graph, TransactionGraph};
use fraudrank::ingest::{filter_status, parse_ledger, IngestError, LedgerSchema, Transaction};
use fraudrank::synth::{generate_with_rings, SynthConfig};

/// Result of every fallible call in this API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// The underlying file could not be read.
    Io = 3,
    /// The input was syntactically or semantically malformed.
    Parse = 4,
    /// A parameter was outside its legal range.
    InvalidArgument = 5,
    /// Power iteration hit the iteration cap before reaching tolerance.
    NotConverged = 6,
    /// The metric needs both classes but the labels hold only one.
    SingleClass = 7,
    /// An internal invariant failed; file a bug with the error message.
    Internal = 8,
}

/// Edge weighting used by the random walk.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrWeightMode {
    /// Transition probability proportional to transaction count.
    Count = 0,
    /// Proportional to summed amount.
    Amount = 1,
    /// Uniform over distinct out-neighbors.
    Unweighted = 2,
}

/// Opaque handle to an in-memory transaction ledger.
pub struct FrLedger(Vec<Transaction>);

/// Opaque handle to a directed, weighted account graph.
pub struct FrGraph(TransactionGraph);

/// Opaque handle to converged per-account exposure scores.
pub struct FrScores {
    by_account: HashMap<i64, f64>,
    iterations_used: usize,
    converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized: String = message.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("nul bytes removed");
    });
}

fn fail(status: FrStatus, message: &str) -> FrStatus {
    set_error(message);
    status
}

fn from_ingest(err: &IngestError) -> FrStatus {
    match err {
        IngestError::Io(_) => FrStatus::Io,
        _ => FrStatus::Parse,
    }
}

fn from_exposure(err: &ExposureError) -> FrStatus {
    match err {
        ExposureError::NotConverged { .. } => FrStatus::NotConverged,
        _ => FrStatus::InvalidArgument,
    }
}

fn from_eval(err: &EvalError) -> FrStatus {
    match err {
        EvalError::SingleClassEval(_) => FrStatus::SingleClass,
        _ => FrStatus::InvalidArgument,
    }
}

/// Runs `body` with panics converted to `FR_STATUS_INTERNAL`.
fn guarded(body: impl FnOnce() -> FrStatus) -> FrStatus {
    catch_unwind(AssertUnwindSafe(body))
        .unwrap_or_else(|_| fail(FrStatus::Internal, "internal panic at the FFI boundary"))
}

/// # Safety
///
/// `ptr` must be null or a valid NUL-terminated C string.
unsafe fn utf8_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, FrStatus> {
    if ptr.is_null() {
        return Err(fail(
            FrStatus::NullPointer,
            &format!("`{name}` must not be null"),
        ));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| fail(FrStatus::Utf8, &format!("`{name}` is not valid UTF-8")))
}

fn require_out<T>(out: *mut T, name: &str) -> Result<(), FrStatus> {
    if out.is_null() {
        Err(fail(
            FrStatus::NullPointer,
            &format!("`{name}` must not be null"),
        ))
    } else {
        Ok(())
    }
}

/// # Safety
///
/// `handle` must be null or a pointer previously returned by this API
/// and not yet freed.
unsafe fn borrow<'a, T>(handle: *const T, name: &str) -> Result<&'a T, FrStatus> {
    if handle.is_null() {
        Err(fail(
            FrStatus::NullPointer,
            &format!("`{name}` must not be null"),
        ))
    } else {
        Ok(unsafe { &*handle })
    }
}

/// Returns the message of the most recent failure on this thread, as a
/// NUL-terminated string. The pointer stays valid until the next
/// fraudrank call on the same thread. Never null; empty when no call
/// has failed yet.
#[no_mangle]
pub extern "C" fn fr_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses a ledger CSV (the 15-column schema) into a new handle.
///
/// On success writes the handle to `out_ledger` and returns
/// `FR_STATUS_OK`; the caller owns the handle and must release it with
/// `fr_ledger_free`.
///
/// # Safety
///
/// `path` must be a valid NUL-terminated string; `out_ledger` must
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn fr_ledger_load_csv(
    path: *const c_char,
    out_ledger: *mut *mut FrLedger,
) -> FrStatus {
    guarded(|| {
        if let Err(status) = require_out(out_ledger, "out_ledger") {
            return status;
        }
        let path = match unsafe { utf8_arg(path, "path") } {
            Ok(path) => path,
            Err(status) => return status,
        };
        let file = match std::fs::File::open(path) {
            Ok(file) => file,
            Err(err) => return fail(FrStatus::Io, &format!("cannot open {path}: {err}")),
        };
        match parse_ledger(std::io::BufReader::new(file), &LedgerSchema::default()) {
            Ok(rows) => {
                unsafe { *out_ledger = Box::into_raw(Box::new(FrLedger(rows))) };
                FrStatus::Ok
            }
            Err(err) => fail(from_ingest(&err), &err.to_string()),
        }
    })
}

/// Generates a deterministic synthetic ledger with injected fraud
/// rings (all other generator settings at their defaults).
///
/// # Safety
///
/// `out_ledger` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn fr_ledger_synthesize(
    seed: u64,
    n_accounts: usize,
    n_transactions: usize,
    span_days: u32,
    fraud_rate: f64,
    n_rings: usize,
    ring_size: usize,
    out_ledger: *mut *mut FrLedger,
) -> FrStatus {
    guarded(|| {
        if let Err(status) = require_out(out_ledger, "out_ledger") {
            return status;
        }
        let config = SynthConfig {
            seed,
            n_accounts,
            n_transactions,
            span_days,
            fraud_rate,
            n_rings,
            ring_size,
            ..SynthConfig::default()
        };
        match generate_with_rings(&config) {
            Ok((rows, _rings)) => {
                unsafe { *out_ledger = Box::into_raw(Box::new(FrLedger(rows))) };
                FrStatus::Ok
            }
            Err(err) => fail(FrStatus::InvalidArgument, &err.to_string()),
        }
    })
}

/// Copies the rows whose status equals `status` (exact, case-sensitive)
/// into a new ledger handle.
///
/// # Safety
///
/// `ledger` must be a live handle; `status` a valid NUL-terminated
/// string; `out_ledger` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn fr_ledger_filter_status(
    ledger: *const FrLedger,
    status: *const c_char,
    out_ledger: *mut *mut FrLedger,
) -> FrStatus {
    guarded(|| {
        if let Err(status) = require_out(out_ledger, "out_ledger") {
            return status;
        }
        let ledger = match unsafe { borrow(ledger, "ledger") } {
            Ok(ledger) => ledger,
            Err(status) => return status,
        };
        let wanted = match unsafe { utf8_arg(status, "status") } {
            Ok(wanted) => wanted,
            Err(status) => return status,
        };
        let kept = filter_status(ledger.0.clone(), wanted);
        unsafe { *out_ledger = Box::into_raw(Box::new(FrLedger(kept))) };
        FrStatus::Ok
    })
}

/// Number of rows in the ledger; 0 for a null handle.
///
/// # Safety
///
/// `ledger` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fr_ledger_len(ledger: *const FrLedger) -> usize {
    if ledger.is_null() {
        0
    } else {
        unsafe { &*ledger }.0.len()
    }
}

/// Releases a ledger handle. Null is a no-op.
///
/// # Safety
///
/// `ledger` must be null or a handle returned by this API, not yet
/// freed; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fr_ledger_free(ledger: *mut FrLedger) {
    if !ledger.is_null() {
        drop(unsafe { Box::from_raw(ledger) });
    }
}

/// Builds the directed weighted account graph of a ledger.
///
/// # Safety
///
/// `ledger` must be a live handle; `out_graph` writable storage for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn fr_graph_build(
    ledger: *const FrLedger,
    out_graph: *mut *mut FrGraph,
) -> FrStatus {
    guarded(|| {
        if let Err(status) = require_out(out_graph, "out_graph") {
            return status;
        }
        let ledger = match unsafe { borrow(ledger, "ledger") } {
            Ok(ledger) => ledger,
            Err(status) => return status,
        };
        let graph = build_graph(&ledger.0);
        unsafe { *out_graph = Box::into_raw(Box::new(FrGraph(graph))) };
        FrStatus::Ok
    })
}

/// Number of accounts (nodes); 0 for a null handle.
///
/// # Safety
///
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fr_graph_n_nodes(graph: *const FrGraph) -> usize {
    if graph.is_null() {
        0
    } else {
        unsafe { &*graph }.0.n_nodes()
    }
}

/// Number of aggregated directed edges; 0 for a null handle.
///
/// # Safety
///
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fr_graph_n_edges(graph: *const FrGraph) -> usize {
    if graph.is_null() {
        0
    } else {
        unsafe { &*graph }.0.n_edges()
    }
}

/// Releases a graph handle. Null is a no-op.
///
/// # Safety
///
/// `graph` must be null or a handle returned by this API, not yet
/// freed; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fr_graph_free(graph: *mut FrGraph) {
    if !graph.is_null() {
        drop(unsafe { Box::from_raw(graph) });
    }
}

/// Runs label-personalized PageRank over `graph`, seeding the
/// teleportation distribution from the fraud labels in `ledger`
/// (per-account label averages; uniform when no labels are set).
///
/// Typical parameters: `alpha` 0.85, `tol` 1e-9, `max_iter` 1000.
///
/// # Safety
///
/// `graph` and `ledger` must be live handles; `out_scores` writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn fr_exposure_compute(
    graph: *const FrGraph,
    ledger: *const FrLedger,
    alpha: f64,
    tol: f64,
    max_iter: usize,
    weight_mode: FrWeightMode,
    out_scores: *mut *mut FrScores,
) -> FrStatus {
    guarded(|| {
        if let Err(status) = require_out(out_scores, "out_scores") {
            return status;
        }
        let graph = match unsafe { borrow(graph, "graph") } {
            Ok(graph) => graph,
            Err(status) => return status,
        };
        let ledger = match unsafe { borrow(ledger, "ledger") } {
            Ok(ledger) => ledger,
            Err(status) => return status,
        };
        let personalization = match build_personalization(&ledger.0, &graph.0) {
            Ok(p) => p,
            Err(err) => return fail(from_exposure(&err), &err.to_string()),
        };
        let params = PprParams {
            alpha,
            tol,
            max_iter,
            weight_mode: match weight_mode {
                FrWeightMode::Count => WeightMode::Count,
                FrWeightMode::Amount => WeightMode::Amount,
                FrWeightMode::Unweighted => WeightMode::Unweighted,
            },
        };
        match compute_ppr(&graph.0, &personalization, &params) {
            Ok(scores) => {
                let by_account = (0..graph.0.n_nodes() as u32)
                    .map(|u| (graph.0.account_at(u), scores.scores[u as usize]))
                    .collect();
                unsafe {
                    *out_scores = Box::into_raw(Box::new(FrScores {
                        by_account,
                        iterations_used: scores.iterations_used,
                        converged: scores.converged,
                    }));
                }
                FrStatus::Ok
            }
            Err(err) => fail(from_exposure(&err), &err.to_string()),
        }
    })
}

/// Number of scored accounts; 0 for a null handle.
///
/// # Safety
///
/// `scores` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fr_scores_len(scores: *const FrScores) -> usize {
    if scores.is_null() {
        0
    } else {
        unsafe { &*scores }.by_account.len()
    }
}

/// Power-iteration count actually used; 0 for a null handle.
///
/// # Safety
///
/// `scores` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fr_scores_iterations(scores: *const FrScores) -> usize {
    if scores.is_null() {
        0
    } else {
        unsafe { &*scores }.iterations_used
    }
}

/// Whether the iteration reached its tolerance; false for null.
///
/// # Safety
///
/// `scores` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fr_scores_converged(scores: *const FrScores) -> bool {
    if scores.is_null() {
        false
    } else {
        unsafe { &*scores }.converged
    }
}

/// Looks up one account's exposure score. Accounts absent from the
/// scored graph read as 0.0 ("no known exposure"), which is a success.
///
/// # Safety
///
/// `scores` must be a live handle; `out_score` writable storage for one
/// double.
#[no_mangle]
pub unsafe extern "C" fn fr_scores_account(
    scores: *const FrScores,
    account: i64,
    out_score: *mut f64,
) -> FrStatus {
    guarded(|| {
        if let Err(status) = require_out(out_score, "out_score") {
            return status;
        }
        let scores = match unsafe { borrow(scores, "scores") } {
            Ok(scores) => scores,
            Err(status) => return status,
        };
        let value = scores.by_account.get(&account).copied().unwrap_or(0.0);
        unsafe { *out_score = value };
        FrStatus::Ok
    })
}

/// Releases a scores handle. Null is a no-op.
///
/// # Safety
///
/// `scores` must be null or a handle returned by this API, not yet
/// freed; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fr_scores_free(scores: *mut FrScores) {
    if !scores.is_null() {
        drop(unsafe { Box::from_raw(scores) });
    }
}

/// Tie-aware ROC AUC of `len` score/label pairs (labels 0 or 1).
///
/// # Safety
///
/// `scores` and `labels` must point to `len` readable elements each;
/// `out_auc` must be writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn fr_roc_auc(
    scores: *const f64,
    labels: *const u8,
    len: usize,
    out_auc: *mut f64,
) -> FrStatus {
    guarded(|| {
        if let Err(status) = require_out(out_auc, "out_auc") {
            return status;
        }
        if scores.is_null() || labels.is_null() {
            return fail(
                FrStatus::NullPointer,
                "`scores` and `labels` must not be null",
            );
        }
        let scores = unsafe { std::slice::from_raw_parts(scores, len) };
        let labels = unsafe { std::slice::from_raw_parts(labels, len) };
        match roc_auc(scores, labels) {
            Ok(auc) => {
                unsafe { *out_auc = auc };
                FrStatus::Ok
            }
            Err(err) => fail(from_eval(&err), &err.to_string()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::io::Write;
    use std::ptr;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(fr_last_error()) }
            .to_string_lossy()
            .into_owned()
    }

    fn synthesize(seed: u64) -> *mut FrLedger {
        let mut ledger: *mut FrLedger = ptr::null_mut();
        let status = unsafe { fr_ledger_synthesize(seed, 80, 4000, 90, 0.02, 3, 3, &mut ledger) };
        assert_eq!(status, FrStatus::Ok, "{}", last_error());
        assert!(!ledger.is_null());
        ledger
    }

    #[test]
    fn happy_path_from_synthesis_to_scores() {
        let ledger = synthesize(7);
        assert_eq!(unsafe { fr_ledger_len(ledger) }, 4000);

        let status_filter = CString::new("Initiated").unwrap();
        let mut initiated: *mut FrLedger = ptr::null_mut();
        let status =
            unsafe { fr_ledger_filter_status(ledger, status_filter.as_ptr(), &mut initiated) };
        assert_eq!(status, FrStatus::Ok);
        let kept = unsafe { fr_ledger_len(initiated) };
        assert!(kept > 0 && kept < 4000);

        let mut graph: *mut FrGraph = ptr::null_mut();
        assert_eq!(unsafe { fr_graph_build(ledger, &mut graph) }, FrStatus::Ok);
        let n_nodes = unsafe { fr_graph_n_nodes(graph) };
        assert!(n_nodes > 0 && n_nodes <= 80);
        assert!(unsafe { fr_graph_n_edges(graph) } > 0);

        let mut scores: *mut FrScores = ptr::null_mut();
        let status = unsafe {
            fr_exposure_compute(
                graph,
                ledger,
                0.85,
                1e-9,
                1000,
                FrWeightMode::Count,
                &mut scores,
            )
        };
        assert_eq!(status, FrStatus::Ok, "{}", last_error());
        assert!(unsafe { fr_scores_converged(scores) });
        assert_eq!(unsafe { fr_scores_len(scores) }, n_nodes);
        assert!(unsafe { fr_scores_iterations(scores) } > 0);

        // An account that never transacts scores zero exposure.
        let mut missing = f64::NAN;
        assert_eq!(
            unsafe { fr_scores_account(scores, i64::MIN, &mut missing) },
            FrStatus::Ok
        );
        assert_eq!(missing, 0.0);

        // Scores outlive the graph they came from.
        unsafe { fr_graph_free(graph) };
        let mut any = f64::NAN;
        assert_eq!(
            unsafe { fr_scores_account(scores, i64::MIN, &mut any) },
            FrStatus::Ok
        );

        unsafe {
            fr_scores_free(scores);
            fr_ledger_free(initiated);
            fr_ledger_free(ledger);
        }
    }

    #[test]
    fn null_arguments_are_rejected_with_messages() {
        let mut out: *mut FrLedger = ptr::null_mut();
        let status = unsafe { fr_ledger_load_csv(ptr::null(), &mut out) };
        assert_eq!(status, FrStatus::NullPointer);
        assert!(last_error().contains("path"));

        let path = CString::new("/nonexistent").unwrap();
        let status = unsafe { fr_ledger_load_csv(path.as_ptr(), ptr::null_mut()) };
        assert_eq!(status, FrStatus::NullPointer);
        assert!(last_error().contains("out_ledger"));

        let mut graph: *mut FrGraph = ptr::null_mut();
        assert_eq!(
            unsafe { fr_graph_build(ptr::null(), &mut graph) },
            FrStatus::NullPointer
        );

        // Frees and accessors tolerate null.
        unsafe {
            fr_ledger_free(ptr::null_mut());
            fr_graph_free(ptr::null_mut());
            fr_scores_free(ptr::null_mut());
        }
        assert_eq!(unsafe { fr_ledger_len(ptr::null()) }, 0);
        assert!(!unsafe { fr_scores_converged(ptr::null()) });
    }

    #[test]
    fn io_and_parse_failures_map_to_distinct_codes() {
        let path = CString::new("/no/such/file.csv").unwrap();
        let mut out: *mut FrLedger = ptr::null_mut();
        assert_eq!(
            unsafe { fr_ledger_load_csv(path.as_ptr(), &mut out) },
            FrStatus::Io
        );
        assert!(last_error().contains("/no/such/file.csv"));

        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "not,a,ledger").unwrap();
        let path = CString::new(file.path().to_str().unwrap()).unwrap();
        assert_eq!(
            unsafe { fr_ledger_load_csv(path.as_ptr(), &mut out) },
            FrStatus::Parse
        );
        assert!(!last_error().is_empty());
    }

    #[test]
    fn invalid_utf8_and_bad_parameters_are_flagged() {
        let bad = [0xffu8, 0xfe, 0x00];
        let mut out: *mut FrLedger = ptr::null_mut();
        let status = unsafe { fr_ledger_load_csv(bad.as_ptr().cast(), &mut out) };
        assert_eq!(status, FrStatus::Utf8);

        // Ring capacity exceeding the account pool is invalid.
        let mut ledger: *mut FrLedger = ptr::null_mut();
        let status = unsafe { fr_ledger_synthesize(1, 5, 100, 30, 0.1, 3, 3, &mut ledger) };
        assert_eq!(status, FrStatus::InvalidArgument);

        // Out-of-range damping factor.
        let ledger = synthesize(9);
        let mut graph: *mut FrGraph = ptr::null_mut();
        assert_eq!(unsafe { fr_graph_build(ledger, &mut graph) }, FrStatus::Ok);
        let mut scores: *mut FrScores = ptr::null_mut();
        let status = unsafe {
            fr_exposure_compute(
                graph,
                ledger,
                1.5,
                1e-9,
                100,
                FrWeightMode::Count,
                &mut scores,
            )
        };
        assert_eq!(status, FrStatus::InvalidArgument);
        assert!(last_error().contains("alpha"));
        unsafe {
            fr_graph_free(graph);
            fr_ledger_free(ledger);
        }
    }

    #[test]
    fn auc_over_ffi_matches_the_hand_case() {
        let scores = [0.1f64, 0.4, 0.35, 0.8];
        let labels = [0u8, 0, 1, 1];
        let mut auc = f64::NAN;
        let status = unsafe { fr_roc_auc(scores.as_ptr(), labels.as_ptr(), 4, &mut auc) };
        assert_eq!(status, FrStatus::Ok);
        assert_eq!(auc, 0.75);

        let one_class = [1u8, 1, 1, 1];
        let status = unsafe { fr_roc_auc(scores.as_ptr(), one_class.as_ptr(), 4, &mut auc) };
        assert_eq!(status, FrStatus::SingleClass);
    }

    #[test]
    fn generated_header_declares_the_api() {
        let header_path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/fraudrank.h");
        let header = std::fs::read_to_string(header_path).expect("header generated by build.rs");
        for needle in [
            "FRAUDRANK_H",
            "typedef struct FrLedger FrLedger;",
            "typedef struct FrGraph FrGraph;",
            "typedef struct FrScores FrScores;",
            "FR_STATUS_OK",
            "FR_WEIGHT_MODE_COUNT",
            "fr_ledger_load_csv",
            "fr_exposure_compute",
            "fr_scores_account",
            "fr_last_error",
        ] {
            assert!(header.contains(needle), "header lacks `{needle}`");
        }
    }
}
