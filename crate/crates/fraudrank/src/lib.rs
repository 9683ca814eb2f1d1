//! Fraud exposure scoring on transaction graphs.
//!
//! This crate implements an end-to-end pipeline for detecting fraudulent
//! account activity in a payment ledger:
//!
//! 1. [`synth`] generates a synthetic labeled ledger with injected fraud
//!    rings, so the pipeline can be exercised without real data.
//! 2. [`ingest`] parses and validates ledger CSV files, filters by
//!    transaction status, and produces a leak-free chronological split.
//! 3. [`graph`] aggregates transactions into a directed weighted account
//!    graph in compressed sparse row form.
//! 4. [`exposure`] computes personalized PageRank over that graph, seeded
//!    by observed fraud labels, and maps scores back onto transactions.
//! 5. [`features`] derives per-transaction behavioural features using only
//!    strictly earlier history, then appends the exposure score.
//! 6. [`model`] trains a logistic regression classifier with full-batch
//!    gradient descent on standardized features.
//! 7. [`evaluation`] scores the classifier (ROC/AUC, precision/recall)
//!    and checks train/test feature stability via PSI.
//! 8. [`pipeline`] wires the stages together behind a file-based CLI with
//!    deterministic, manifest-tracked artifacts.
//!
//! All randomness is seeded and all numeric paths are single-threaded, so
//! a given configuration always reproduces byte-identical artifacts.

pub mod config;
pub mod evaluation;
pub mod exposure;
pub mod features;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod synth;
