//! Directed weighted account graph in compressed sparse row form.
//!
//! Each distinct account becomes a node; every transaction contributes to
//! the directed edge `debtor -> creditor`. Parallel transactions between
//! the same pair aggregate into a single edge carrying both a transaction
//! count and a total amount (in exact integer cents). Self-loops (which
//! ring injection can produce) are kept.
//!
//! Node ids are assigned by first appearance — debtor before creditor
//! within a row, rows in input order — so the same ledger always yields
//! the same node numbering.

use std::collections::HashMap;
use std::io::Write;

use crate::ingest::{format_amount_cents, Transaction};

/// One aggregated outgoing edge of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutEdge {
    pub target: u32,
    /// Number of transactions aggregated into this edge.
    pub count: u64,
    /// Total transferred amount in integer cents.
    pub amount_cents: i64,
}

/// Headline counts for the `graph-stats` stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub n_nodes: usize,
    pub n_edges: usize,
    /// Total transactions aggregated into the edges.
    pub n_transactions: u64,
    pub n_self_loops: usize,
    /// Nodes with no outgoing edges.
    pub n_dangling: usize,
}

/// Directed weighted multigraph of accounts, aggregated and stored as CSR.
#[derive(Debug, Clone)]
pub struct TransactionGraph {
    accounts: Vec<i64>,
    node_index: HashMap<i64, u32>,
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    out_counts: Vec<u64>,
    out_amounts_cents: Vec<i64>,
}

impl TransactionGraph {
    pub fn n_nodes(&self) -> usize {
        self.accounts.len()
    }

    pub fn n_edges(&self) -> usize {
        self.out_targets.len()
    }

    /// Node id for an account hash, if the account occurs in the graph.
    pub fn node_of(&self, account: i64) -> Option<u32> {
        self.node_index.get(&account).copied()
    }

    /// Account hash of a node id.
    pub fn account_at(&self, node: u32) -> i64 {
        self.accounts[node as usize]
    }

    pub fn out_degree(&self, node: u32) -> usize {
        let n = node as usize;
        self.out_offsets[n + 1] - self.out_offsets[n]
    }

    /// Outgoing edges of `node`, ordered by target id.
    pub fn out_edges(&self, node: u32) -> impl Iterator<Item = OutEdge> + '_ {
        let n = node as usize;
        let range = self.out_offsets[n]..self.out_offsets[n + 1];
        range.map(move |e| OutEdge {
            target: self.out_targets[e],
            count: self.out_counts[e],
            amount_cents: self.out_amounts_cents[e],
        })
    }

    pub fn stats(&self) -> GraphStats {
        let n_self_loops = (0..self.n_nodes() as u32)
            .flat_map(|u| self.out_edges(u).map(move |e| (u, e.target)))
            .filter(|(u, v)| u == v)
            .count();
        let n_dangling = (0..self.n_nodes() as u32)
            .filter(|&u| self.out_degree(u) == 0)
            .count();
        GraphStats {
            n_nodes: self.n_nodes(),
            n_edges: self.n_edges(),
            n_transactions: self.out_counts.iter().sum(),
            n_self_loops,
            n_dangling,
        }
    }

    /// Writes the aggregated edge list as CSV, ordered by (source, target)
    /// node id — i.e. by first appearance, which is deterministic.
    pub fn write_edges<W: Write>(&self, writer: W) -> Result<(), std::io::Error> {
        let mut csv_writer = csv::Writer::from_writer(writer);
        csv_writer
            .write_record([
                "source_account",
                "target_account",
                "txn_count",
                "total_amount",
            ])
            .map_err(std::io::Error::other)?;
        for u in 0..self.n_nodes() as u32 {
            for edge in self.out_edges(u) {
                csv_writer
                    .write_record([
                        self.account_at(u).to_string(),
                        self.account_at(edge.target).to_string(),
                        edge.count.to_string(),
                        format_amount_cents(edge.amount_cents),
                    ])
                    .map_err(std::io::Error::other)?;
            }
        }
        csv_writer.flush()
    }
}

/// Builds the aggregated account graph from a transaction slice.
///
/// An empty slice yields an empty graph. Node ids follow first appearance;
/// within each source node the edges are sorted by target id.
pub fn build_graph(transactions: &[Transaction]) -> TransactionGraph {
    let mut node_index: HashMap<i64, u32> = HashMap::new();
    let mut accounts: Vec<i64> = Vec::new();
    let mut intern = |account: i64, accounts: &mut Vec<i64>| -> u32 {
        *node_index.entry(account).or_insert_with(|| {
            accounts.push(account);
            (accounts.len() - 1) as u32
        })
    };

    let mut edge_weights: HashMap<(u32, u32), (u64, i64)> = HashMap::new();
    for t in transactions {
        let src = intern(t.debtor_account, &mut accounts);
        let dst = intern(t.creditor_account, &mut accounts);
        let entry = edge_weights.entry((src, dst)).or_insert((0, 0));
        entry.0 += 1;
        entry.1 += t.amount_cents;
    }

    let mut edges: Vec<((u32, u32), (u64, i64))> = edge_weights.into_iter().collect();
    edges.sort_unstable_by_key(|(key, _)| *key);

    let n = accounts.len();
    let mut out_offsets = vec![0usize; n + 1];
    for ((src, _), _) in &edges {
        out_offsets[*src as usize + 1] += 1;
    }
    for i in 0..n {
        out_offsets[i + 1] += out_offsets[i];
    }
    let mut out_targets = Vec::with_capacity(edges.len());
    let mut out_counts = Vec::with_capacity(edges.len());
    let mut out_amounts_cents = Vec::with_capacity(edges.len());
    for ((_, dst), (count, amount)) in edges {
        out_targets.push(dst);
        out_counts.push(count);
        out_amounts_cents.push(amount);
    }

    TransactionGraph {
        accounts,
        node_index,
        out_offsets,
        out_targets,
        out_counts,
        out_amounts_cents,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Transaction, TIMESTAMP_FORMAT};
    use chrono::NaiveDateTime;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn txn(debtor: i64, creditor: i64, cents: i64) -> Transaction {
        let event_time =
            NaiveDateTime::parse_from_str("2020-09-01T00:00:00", TIMESTAMP_FORMAT).unwrap();
        Transaction {
            id: "t".into(),
            event_time,
            amount_cents: cents,
            currency: "EUR".into(),
            execution_date: event_time.date(),
            txn_type: "Domestic".into(),
            status: "Initiated".into(),
            channel: "DIRECT_WEB".into(),
            label: 0,
            debtor_account: debtor,
            creditor_account: creditor,
            party_id: 1,
            source_ip: 2,
            session_id: 3,
            creditor_party_id: 4,
        }
    }

    #[test]
    fn parallel_transactions_aggregate_into_one_edge() {
        let txns = vec![txn(10, 20, 10000), txn(10, 20, 72121), txn(20, 30, 500)];
        let graph = build_graph(&txns);
        assert_eq!(graph.n_nodes(), 3);
        assert_eq!(graph.n_edges(), 2);

        let a = graph.node_of(10).unwrap();
        let edges: Vec<OutEdge> = graph.out_edges(a).collect();
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].count, 2);
        assert_eq!(edges[0].amount_cents, 82121);
        assert_eq!(graph.account_at(edges[0].target), 20);
    }

    #[test]
    fn node_ids_follow_first_appearance() {
        let txns = vec![txn(5, 7, 1), txn(7, 5, 1), txn(9, 5, 1)];
        let graph = build_graph(&txns);
        assert_eq!(graph.node_of(5), Some(0));
        assert_eq!(graph.node_of(7), Some(1));
        assert_eq!(graph.node_of(9), Some(2));
        assert_eq!(graph.account_at(2), 9);
        assert_eq!(graph.node_of(999), None);
    }

    #[test]
    fn self_loops_are_kept() {
        let txns = vec![txn(1, 1, 42)];
        let graph = build_graph(&txns);
        assert_eq!(graph.n_nodes(), 1);
        assert_eq!(graph.n_edges(), 1);
        let stats = graph.stats();
        assert_eq!(stats.n_self_loops, 1);
        assert_eq!(stats.n_dangling, 0);
    }

    #[test]
    fn empty_input_builds_empty_graph() {
        let graph = build_graph(&[]);
        assert_eq!(graph.n_nodes(), 0);
        assert_eq!(graph.n_edges(), 0);
        assert_eq!(graph.stats().n_transactions, 0);
    }

    #[test]
    fn stats_count_dangling_nodes() {
        // 1 -> 2, 3 -> 2: node 2 has no outgoing edges.
        let txns = vec![txn(1, 2, 1), txn(3, 2, 1)];
        let stats = build_graph(&txns).stats();
        assert_eq!(stats.n_nodes, 3);
        assert_eq!(stats.n_edges, 2);
        assert_eq!(stats.n_dangling, 1);
        assert_eq!(stats.n_transactions, 2);
    }

    #[test]
    fn edge_csv_is_ordered_and_formats_amounts() {
        let txns = vec![txn(10, 20, 10000), txn(10, 20, 72121), txn(20, 30, 500)];
        let graph = build_graph(&txns);
        let mut buffer = Vec::new();
        graph.write_edges(&mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let expected = "source_account,target_account,txn_count,total_amount\n\
                        10,20,2,821.21\n\
                        20,30,1,5.00\n";
        assert_eq!(text, expected);
    }

    proptest! {
        #[test]
        fn csr_matches_naive_aggregation(
            rows in prop::collection::vec((1i64..12, 1i64..12, 0i64..10_000), 0..200)
        ) {
            let txns: Vec<Transaction> =
                rows.iter().map(|&(d, c, cents)| txn(d, c, cents)).collect();
            let graph = build_graph(&txns);

            // Naive reference aggregation.
            let mut reference: std::collections::HashMap<(i64, i64), (u64, i64)> =
                std::collections::HashMap::new();
            for t in &txns {
                let e = reference
                    .entry((t.debtor_account, t.creditor_account))
                    .or_insert((0, 0));
                e.0 += 1;
                e.1 += t.amount_cents;
            }

            let distinct: HashSet<i64> = txns
                .iter()
                .flat_map(|t| [t.debtor_account, t.creditor_account])
                .collect();
            prop_assert_eq!(graph.n_nodes(), distinct.len());
            prop_assert_eq!(graph.n_edges(), reference.len());

            let mut seen_edges = 0usize;
            let mut txn_total = 0u64;
            for u in 0..graph.n_nodes() as u32 {
                let mut last_target = None;
                for edge in graph.out_edges(u) {
                    // Strictly increasing targets within a row: sorted and
                    // therefore free of duplicate (src, dst) pairs.
                    if let Some(prev) = last_target {
                        prop_assert!(edge.target > prev);
                    }
                    last_target = Some(edge.target);
                    let key = (graph.account_at(u), graph.account_at(edge.target));
                    let &(count, amount) = reference.get(&key).unwrap();
                    prop_assert_eq!(edge.count, count);
                    prop_assert_eq!(edge.amount_cents, amount);
                    prop_assert!(edge.count > 0);
                    seen_edges += 1;
                    txn_total += edge.count;
                }
            }
            prop_assert_eq!(seen_edges, graph.n_edges());
            prop_assert_eq!(txn_total, txns.len() as u64);
        }
    }
}
