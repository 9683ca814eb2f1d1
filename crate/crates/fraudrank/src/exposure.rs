//! Personalized PageRank exposure scores over the account graph.
//!
//! Accounts that transact with known-fraudulent counterparties inherit a
//! share of their risk. We model that by running PageRank with a
//! personalization vector concentrated on accounts observed in labeled
//! fraud, so the stationary mass measures each account's proximity to
//! fraud along payment flows.
//!
//! The transition matrix is row-stochastic over outgoing edge weights
//! (transaction count by default, total amount or plain degree as
//! alternatives). Dangling nodes — no outgoing weight — redistribute
//! their mass through the personalization vector, which keeps the score
//! vector a probability distribution at every iteration:
//!
//! ```text
//! pi_{k+1} = (1 - alpha) * p + alpha * (T^t pi_k + m_k * p)
//! ```
//!
//! where `m_k` is the mass sitting on dangling nodes at step `k`.
//! Iteration starts from `pi_0 = p` and stops when the L1 change between
//! successive iterates drops below the tolerance.

use std::collections::HashMap;
use std::io::{Read, Write};

use thiserror::Error;

use crate::graph::TransactionGraph;
use crate::ingest::Transaction;

/// Errors raised while building personalization vectors or iterating.
#[derive(Debug, Error)]
pub enum ExposureError {
    /// The graph has no nodes; there is nothing to score.
    #[error("cannot compute exposure over an empty graph")]
    EmptyGraph,
    /// A vector's length does not match the graph's node count.
    #[error("dimension mismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// A transaction references an account absent from the graph.
    #[error("account {0} is not a node of the graph")]
    AccountNotInGraph(i64),
    /// A parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    /// Power iteration hit `max_iter` before the residual fell below the
    /// tolerance. The best iterate and its residual are attached.
    #[error("power iteration did not converge: residual {residual} after {} steps", scores.iterations_used)]
    NotConverged {
        scores: Box<PprScores>,
        residual: f64,
    },
}

/// Which edge attribute drives the transition probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// Transaction count per edge (default).
    #[default]
    Count,
    /// Total transferred amount per edge.
    Amount,
    /// Every edge weighs 1.
    Unweighted,
}

/// Power-iteration parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PprParams {
    /// Damping factor: probability of following an edge vs teleporting.
    pub alpha: f64,
    /// L1 convergence tolerance on successive iterates.
    pub tol: f64,
    pub max_iter: usize,
    pub weight_mode: WeightMode,
}

impl Default for PprParams {
    fn default() -> Self {
        PprParams {
            alpha: 0.85,
            tol: 1e-9,
            max_iter: 1000,
            weight_mode: WeightMode::Count,
        }
    }
}

impl PprParams {
    /// Rejects out-of-range parameters.
    ///
    /// # Errors
    ///
    /// [`ExposureError::InvalidParams`] naming the offending field.
    pub fn validate(&self) -> Result<(), ExposureError> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(ExposureError::InvalidParams(format!(
                "alpha must be in [0, 1), got {}",
                self.alpha
            )));
        }
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return Err(ExposureError::InvalidParams(format!(
                "tol must be positive and finite, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(ExposureError::InvalidParams(
                "max_iter must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// A probability distribution over graph nodes (entries sum to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PersonalizationVector(Vec<f64>);

impl PersonalizationVector {
    /// Normalizes non-negative raw weights into a distribution. An
    /// all-zero vector falls back to uniform.
    pub fn from_weights(raw: Vec<f64>) -> Result<Self, ExposureError> {
        if raw.is_empty() {
            return Err(ExposureError::EmptyGraph);
        }
        if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(ExposureError::InvalidParams(
                "personalization weights must be finite and non-negative".to_string(),
            ));
        }
        let sum: f64 = raw.iter().sum();
        if sum == 0.0 {
            return Ok(Self::uniform(raw.len()));
        }
        Ok(PersonalizationVector(
            raw.into_iter().map(|w| w / sum).collect(),
        ))
    }

    /// The uniform distribution over `n` nodes.
    pub fn uniform(n: usize) -> Self {
        PersonalizationVector(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Result of a personalized PageRank run.
#[derive(Debug, Clone, PartialEq)]
pub struct PprScores {
    /// Score per node id, a probability distribution over the graph.
    pub scores: Vec<f64>,
    /// Number of update steps performed.
    pub iterations_used: usize,
    pub converged: bool,
}

impl PprScores {
    /// Wraps precomputed scores (e.g. read back from `ppr_scores.csv`).
    pub fn from_scores(scores: Vec<f64>) -> Self {
        PprScores {
            scores,
            iterations_used: 0,
            converged: true,
        }
    }
}

/// How a transaction aggregates the scores of its two endpoint accounts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExposureMode {
    /// Debtor score plus creditor score (default).
    #[default]
    Sum,
    /// The larger endpoint score.
    Max,
    /// Creditor score only.
    CreditorOnly,
}

/// Builds the label-seeded personalization vector.
///
/// For every account, compute its average fraud label over transactions
/// where it appears as debtor and, separately, as creditor. The raw score
/// is the creditor average where one exists, otherwise the debtor
/// average, otherwise zero. Raw scores are normalized to sum 1; when all
/// labels are zero the vector falls back to uniform so iteration reduces
/// to standard PageRank.
///
/// # Errors
///
/// [`ExposureError::EmptyGraph`] on a node-less graph and
/// [`ExposureError::AccountNotInGraph`] when `transactions` references an
/// account the graph does not contain.
pub fn build_personalization(
    transactions: &[Transaction],
    graph: &TransactionGraph,
) -> Result<PersonalizationVector, ExposureError> {
    let n = graph.n_nodes();
    if n == 0 {
        return Err(ExposureError::EmptyGraph);
    }
    let mut debtor_sum = vec![0.0f64; n];
    let mut debtor_count = vec![0u64; n];
    let mut creditor_sum = vec![0.0f64; n];
    let mut creditor_count = vec![0u64; n];
    for t in transactions {
        let d = graph
            .node_of(t.debtor_account)
            .ok_or(ExposureError::AccountNotInGraph(t.debtor_account))? as usize;
        let c = graph
            .node_of(t.creditor_account)
            .ok_or(ExposureError::AccountNotInGraph(t.creditor_account))? as usize;
        debtor_sum[d] += f64::from(t.label);
        debtor_count[d] += 1;
        creditor_sum[c] += f64::from(t.label);
        creditor_count[c] += 1;
    }

    let mut raw = vec![0.0f64; n];
    for v in 0..n {
        if debtor_count[v] > 0 {
            raw[v] = debtor_sum[v] / debtor_count[v] as f64;
        }
        // Creditor averages take precedence where both sides exist.
        if creditor_count[v] > 0 {
            raw[v] = creditor_sum[v] / creditor_count[v] as f64;
        }
    }
    PersonalizationVector::from_weights(raw)
}

/// Per-node total outgoing weight under a weight mode.
fn out_weights(graph: &TransactionGraph, mode: WeightMode) -> Vec<f64> {
    (0..graph.n_nodes() as u32)
        .map(|u| {
            graph
                .out_edges(u)
                .map(|e| match mode {
                    WeightMode::Count => e.count as f64,
                    WeightMode::Amount => e.amount_cents as f64,
                    WeightMode::Unweighted => 1.0,
                })
                .sum()
        })
        .collect()
}

/// Runs personalized PageRank by power iteration.
///
/// Every iterate is a probability distribution: teleport mass, edge
/// mass, and redistributed dangling mass always add up to 1 (up to
/// floating-point roundoff).
///
/// # Errors
///
/// [`ExposureError::NotConverged`] carries the final iterate and its
/// residual when `max_iter` is exhausted; dimension and parameter
/// problems are reported before iteration starts.
pub fn compute_ppr(
    graph: &TransactionGraph,
    personalization: &PersonalizationVector,
    params: &PprParams,
) -> Result<PprScores, ExposureError> {
    params.validate()?;
    let n = graph.n_nodes();
    if n == 0 {
        return Err(ExposureError::EmptyGraph);
    }
    if personalization.len() != n {
        return Err(ExposureError::DimensionMismatch {
            expected: n,
            got: personalization.len(),
        });
    }

    let p = personalization.as_slice();
    let alpha = params.alpha;
    let weights = out_weights(graph, params.weight_mode);
    // A node with zero total outgoing weight is dangling under this mode;
    // that covers both no out-edges and all-zero amounts in amount mode.
    let dangling: Vec<usize> = (0..n).filter(|&u| weights[u] == 0.0).collect();

    let mut pi: Vec<f64> = p.to_vec();
    let mut residual = f64::INFINITY;
    for iteration in 1..=params.max_iter {
        let dangling_mass: f64 = dangling.iter().map(|&u| pi[u]).sum();
        let teleport = (1.0 - alpha) + alpha * dangling_mass;
        let mut next: Vec<f64> = p.iter().map(|&pv| teleport * pv).collect();
        for u in 0..n {
            if weights[u] == 0.0 {
                continue;
            }
            let share = alpha * pi[u] / weights[u];
            for e in graph.out_edges(u as u32) {
                let w = match params.weight_mode {
                    WeightMode::Count => e.count as f64,
                    WeightMode::Amount => e.amount_cents as f64,
                    WeightMode::Unweighted => 1.0,
                };
                next[e.target as usize] += share * w;
            }
        }
        residual = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if residual < params.tol {
            return Ok(PprScores {
                scores: pi,
                iterations_used: iteration,
                converged: true,
            });
        }
    }
    Err(ExposureError::NotConverged {
        scores: Box::new(PprScores {
            scores: pi,
            iterations_used: params.max_iter,
            converged: false,
        }),
        residual,
    })
}

/// Exposure of a single transaction: its endpoint account scores
/// combined according to `mode`. Accounts outside the graph contribute 0.
pub fn transaction_exposure(
    txn: &Transaction,
    scores: &PprScores,
    graph: &TransactionGraph,
    mode: ExposureMode,
) -> f64 {
    let score_of = |account: i64| -> f64 {
        graph
            .node_of(account)
            .map_or(0.0, |u| scores.scores[u as usize])
    };
    let debtor = score_of(txn.debtor_account);
    let creditor = score_of(txn.creditor_account);
    match mode {
        ExposureMode::Sum => debtor + creditor,
        ExposureMode::Max => debtor.max(creditor),
        ExposureMode::CreditorOnly => creditor,
    }
}

/// Writes per-account scores as CSV, highest first (ties broken by
/// ascending account hash, so the order is total and deterministic).
pub fn write_scores<W: Write>(
    writer: W,
    scores: &PprScores,
    graph: &TransactionGraph,
) -> Result<(), std::io::Error> {
    let mut rows: Vec<(i64, f64)> = (0..graph.n_nodes() as u32)
        .map(|u| (graph.account_at(u), scores.scores[u as usize]))
        .collect();
    rows.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("scores are never NaN")
            .then(a.0.cmp(&b.0))
    });
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer
        .write_record(["accountnumberhash", "score"])
        .map_err(std::io::Error::other)?;
    for (account, score) in rows {
        csv_writer
            .write_record([account.to_string(), score.to_string()])
            .map_err(std::io::Error::other)?;
    }
    csv_writer.flush()
}

/// Reads a score file written by [`write_scores`] into an account map.
pub fn read_scores<R: Read>(reader: R) -> Result<HashMap<i64, f64>, std::io::Error> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let mut map = HashMap::new();
    for record in csv_reader.records() {
        let record = record.map_err(std::io::Error::other)?;
        let account: i64 = record
            .get(0)
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| std::io::Error::other("bad account hash in score file"))?;
        let score: f64 = record
            .get(1)
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| std::io::Error::other("bad score in score file"))?;
        map.insert(account, score);
    }
    Ok(map)
}

/// Rehydrates node-ordered scores from an account-score map.
///
/// # Errors
///
/// [`ExposureError::AccountNotInGraph`] — reported with the offending
/// account — when the map lacks a node of the graph.
pub fn scores_for_graph(
    map: &HashMap<i64, f64>,
    graph: &TransactionGraph,
) -> Result<PprScores, ExposureError> {
    let scores = (0..graph.n_nodes() as u32)
        .map(|u| {
            let account = graph.account_at(u);
            map.get(&account)
                .copied()
                .ok_or(ExposureError::AccountNotInGraph(account))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(PprScores::from_scores(scores))
}
