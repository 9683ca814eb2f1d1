//! Per-transaction behavioural features from strictly-earlier history.
//!
//! Every feature of a transaction at time `t` is computed from events in
//! the half-open window `[t - W, t)` — never from the transaction itself,
//! never from anything at or after `t`. [`assemble_features`] enforces
//! this by walking the ledger in batches of equal timestamps: all rows in
//! a batch are scored against the state accumulated from strictly earlier
//! batches, and only then recorded. Re-running a row's features after
//! deleting all data at or after its timestamp therefore reproduces the
//! identical values, which is the leak-freedom property the tests pin.
//!
//! The seven features, in column order:
//!
//! | column                        | meaning                                        |
//! |-------------------------------|------------------------------------------------|
//! | `current_amount`              | transaction amount in euros                    |
//! | `current_amount_first_digit`  | first significant decimal digit of the amount  |
//! | `channel_index`               | train-frequency rank of the channel, scaled    |
//! | `trx_count_creditor`          | inbound payments to the creditor in the window |
//! | `day_of_week`                 | debtor's smoothed same-weekday propensity      |
//! | `time_of_day`                 | debtor's recent-vs-window average amount ratio |
//! | `ppr`                         | graph exposure score of the endpoints          |

use std::collections::{HashMap, VecDeque};
use std::io::{Read, Write};

use chrono::{Datelike, Duration, NaiveDateTime, Timelike};

use crate::exposure::{transaction_exposure, ExposureMode, PprScores};
use crate::graph::TransactionGraph;
use crate::ingest::{SplitDataset, Transaction};

/// Feature column names in canonical order (`ppr` last, label excluded).
pub const FEATURE_COLUMNS: [&str; 7] = [
    "current_amount",
    "current_amount_first_digit",
    "channel_index",
    "trx_count_creditor",
    "day_of_week",
    "time_of_day",
    "ppr",
];

/// How `time_of_day` summarizes the debtor's recent behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeOfDayMode {
    /// Ratio of the 7-day average amount to the full-window average,
    /// clipped to `[0, 10]` (default).
    #[default]
    AmountRatio,
    /// Laplace-smoothed share of window transactions in the same hour.
    HourConsistency,
}

/// Options for feature assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureOptions {
    /// Sliding-window length W in days.
    pub window_days: u32,
    pub exposure_mode: ExposureMode,
    pub time_of_day_mode: TimeOfDayMode,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions {
            // A month and a half of behavioural context.
            window_days: 45,
            exposure_mode: ExposureMode::Sum,
            time_of_day_mode: TimeOfDayMode::AmountRatio,
        }
    }
}

/// Maps channels to `rank / K` by descending training-set frequency.
///
/// The most frequent of the K training channels maps to `1/K`, the least
/// frequent to `1.0`; frequency ties are broken by name so the ranking is
/// total. Channels never seen in training also map to `1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEncoder {
    ranks: HashMap<String, usize>,
    k: usize,
}

impl ChannelEncoder {
    /// Learns the ranking from training transactions.
    pub fn fit(train: &[Transaction]) -> ChannelEncoder {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for t in train {
            *counts.entry(t.channel.as_str()).or_default() += 1;
        }
        let mut ordered: Vec<(&str, u64)> = counts.into_iter().collect();
        ordered.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let k = ordered.len();
        let ranks = ordered
            .into_iter()
            .enumerate()
            .map(|(i, (name, _))| (name.to_string(), i + 1))
            .collect();
        ChannelEncoder { ranks, k }
    }

    /// Encoded value for a channel; unseen channels (or an encoder fit on
    /// no data) yield 1.0.
    pub fn encode(&self, channel: &str) -> f64 {
        if self.k == 0 {
            return 1.0;
        }
        self.ranks
            .get(channel)
            .map_or(1.0, |rank| *rank as f64 / self.k as f64)
    }

    /// Number of distinct channels seen during fitting.
    pub fn n_channels(&self) -> usize {
        self.k
    }
}

/// First significant decimal digit of a non-negative amount; 0 for zero.
pub fn first_digit(amount: f64) -> u8 {
    assert!(amount.is_finite() && amount >= 0.0, "amount {amount}");
    if amount == 0.0 {
        return 0;
    }
    let mut x = amount;
    while x >= 10.0 {
        x /= 10.0;
    }
    while x < 1.0 {
        x *= 10.0;
    }
    x as u8
}

/// Sliding-window event store keyed by account.
///
/// Events must be recorded in non-decreasing time order. All stored
/// events strictly precede any transaction they are used to score; the
/// scoring functions additionally filter to the `[t - W, t)` window, so a
/// standalone (unpruned) index still produces correct values.
#[derive(Debug, Clone)]
pub struct HistoryIndex {
    window: Duration,
    /// Per-debtor outgoing events: `(event_time, amount_cents)`.
    debtor_events: HashMap<i64, VecDeque<(NaiveDateTime, i64)>>,
    /// Per-creditor inbound event times.
    creditor_events: HashMap<i64, VecDeque<NaiveDateTime>>,
    last_recorded: Option<NaiveDateTime>,
}

impl HistoryIndex {
    pub fn new(window_days: u32) -> HistoryIndex {
        HistoryIndex {
            window: Duration::days(i64::from(window_days)),
            debtor_events: HashMap::new(),
            creditor_events: HashMap::new(),
            last_recorded: None,
        }
    }

    /// Adds one transaction to the index.
    pub fn record(&mut self, txn: &Transaction) {
        debug_assert!(
            self.last_recorded.is_none_or(|last| txn.event_time >= last),
            "history must be recorded in chronological order"
        );
        self.last_recorded = Some(txn.event_time);
        self.debtor_events
            .entry(txn.debtor_account)
            .or_default()
            .push_back((txn.event_time, txn.amount_cents));
        self.creditor_events
            .entry(txn.creditor_account)
            .or_default()
            .push_back(txn.event_time);
    }

    /// Drops events that can no longer fall inside any future window
    /// (everything before `now - W`). Purely an efficiency measure.
    pub fn prune(&mut self, now: NaiveDateTime) {
        let cutoff = now - self.window;
        self.debtor_events.retain(|_, events| {
            while events.front().is_some_and(|(t, _)| *t < cutoff) {
                events.pop_front();
            }
            !events.is_empty()
        });
        self.creditor_events.retain(|_, events| {
            while events.front().is_some_and(|t| *t < cutoff) {
                events.pop_front();
            }
            !events.is_empty()
        });
    }

    /// Debtor events inside `[t - W, t)`, newest first.
    fn debtor_window(
        &self,
        account: i64,
        t: NaiveDateTime,
    ) -> impl Iterator<Item = (NaiveDateTime, i64)> + '_ {
        let cutoff = t - self.window;
        self.debtor_events
            .get(&account)
            .into_iter()
            .flat_map(move |events| {
                events
                    .iter()
                    .rev()
                    .skip_while(move |(time, _)| *time >= t)
                    .take_while(move |(time, _)| *time >= cutoff)
                    .copied()
            })
    }
}

/// Smoothed propensity of the debtor to transact on this weekday:
/// `(n_same + 1) / (n_total + 7)` over the debtor's window events.
pub fn day_of_week_score(txn: &Transaction, hist: &HistoryIndex) -> f64 {
    let weekday = txn.event_time.weekday();
    let mut n_total = 0u64;
    let mut n_same = 0u64;
    for (time, _) in hist.debtor_window(txn.debtor_account, txn.event_time) {
        n_total += 1;
        if time.weekday() == weekday {
            n_same += 1;
        }
    }
    (n_same + 1) as f64 / (n_total + 7) as f64
}

/// Recency-of-spend signal for the debtor.
///
/// `AmountRatio`: average amount over the last 7 days divided by the
/// average over the full window, clipped to `[0, 10]`; defaults to 1.0
/// when either average is empty or the window average is zero.
/// `HourConsistency`: `(n_same_hour + 1) / (n_total + 24)` over the
/// window.
pub fn time_of_day_score(txn: &Transaction, hist: &HistoryIndex, mode: TimeOfDayMode) -> f64 {
    match mode {
        TimeOfDayMode::AmountRatio => {
            let recent_cutoff = txn.event_time - Duration::days(7);
            let mut window_sum = 0i64;
            let mut window_count = 0u64;
            let mut recent_sum = 0i64;
            let mut recent_count = 0u64;
            for (time, amount_cents) in hist.debtor_window(txn.debtor_account, txn.event_time) {
                window_sum += amount_cents;
                window_count += 1;
                if time >= recent_cutoff {
                    recent_sum += amount_cents;
                    recent_count += 1;
                }
            }
            if window_count == 0 || recent_count == 0 || window_sum == 0 {
                return 1.0;
            }
            let window_avg = window_sum as f64 / window_count as f64;
            let recent_avg = recent_sum as f64 / recent_count as f64;
            (recent_avg / window_avg).clamp(0.0, 10.0)
        }
        TimeOfDayMode::HourConsistency => {
            let hour = txn.event_time.hour();
            let mut n_total = 0u64;
            let mut n_same = 0u64;
            for (time, _) in hist.debtor_window(txn.debtor_account, txn.event_time) {
                n_total += 1;
                if time.hour() == hour {
                    n_same += 1;
                }
            }
            (n_same + 1) as f64 / (n_total + 24) as f64
        }
    }
}

/// Number of inbound payments the creditor received inside `[t - W, t)`.
pub fn trx_count_creditor(txn: &Transaction, hist: &HistoryIndex) -> u64 {
    let t = txn.event_time;
    let cutoff = t - hist.window;
    hist.creditor_events
        .get(&txn.creditor_account)
        .map_or(0, |events| {
            events
                .iter()
                .rev()
                .skip_while(|time| **time >= t)
                .take_while(|time| **time >= cutoff)
                .count() as u64
        })
}

/// A labeled feature table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    /// Feature column names; the label is carried separately.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column, by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// A copy of the matrix with one column removed (e.g. `ppr` for the
    /// baseline model). Returns `None` when the column does not exist.
    pub fn without_column(&self, name: &str) -> Option<FeatureMatrix> {
        let idx = self.column_index(name)?;
        let columns = self
            .columns
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, c)| c.clone())
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(i, _)| *i != idx)
                    .map(|(_, v)| *v)
                    .collect()
            })
            .collect();
        Some(FeatureMatrix {
            columns,
            rows,
            labels: self.labels.clone(),
        })
    }

    /// Writes the matrix as CSV: feature columns then a final `label`
    /// column. Floats use the shortest representation that parses back to
    /// the identical value, so write/read round-trips are exact.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), std::io::Error> {
        let mut csv_writer = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.columns.iter().map(String::as_str).collect();
        header.push("label");
        csv_writer
            .write_record(&header)
            .map_err(std::io::Error::other)?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.push(label.to_string());
            csv_writer
                .write_record(&record)
                .map_err(std::io::Error::other)?;
        }
        csv_writer.flush()
    }

    /// Reads a matrix written by [`write_csv`]. The final column must be
    /// named `label` and hold 0/1 values.
    pub fn read_csv<R: Read>(reader: R) -> Result<FeatureMatrix, std::io::Error> {
        let mut csv_reader = csv::Reader::from_reader(reader);
        let headers = csv_reader.headers().map_err(std::io::Error::other)?.clone();
        let n_fields = headers.len();
        if n_fields < 2 || headers.get(n_fields - 1) != Some("label") {
            return Err(std::io::Error::other(
                "feature CSV must end with a `label` column",
            ));
        }
        let columns: Vec<String> = headers
            .iter()
            .take(n_fields - 1)
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for record in csv_reader.records() {
            let record = record.map_err(std::io::Error::other)?;
            let mut row = Vec::with_capacity(n_fields - 1);
            for value in record.iter().take(n_fields - 1) {
                row.push(value.parse::<f64>().map_err(std::io::Error::other)?);
            }
            let label: u8 = record
                .get(n_fields - 1)
                .and_then(|v| v.parse().ok())
                .filter(|l| *l <= 1)
                .ok_or_else(|| std::io::Error::other("label must be 0 or 1"))?;
            rows.push(row);
            labels.push(label);
        }
        Ok(FeatureMatrix {
            columns,
            rows,
            labels,
        })
    }
}

/// Feature vector of one transaction against the current history state.
fn feature_row(
    txn: &Transaction,
    hist: &HistoryIndex,
    scores: &PprScores,
    graph: &TransactionGraph,
    encoder: &ChannelEncoder,
    options: &FeatureOptions,
) -> Vec<f64> {
    vec![
        txn.amount(),
        f64::from(first_digit(txn.amount())),
        encoder.encode(&txn.channel),
        trx_count_creditor(txn, hist) as f64,
        day_of_week_score(txn, hist),
        time_of_day_score(txn, hist, options.time_of_day_mode),
        transaction_exposure(txn, scores, graph, options.exposure_mode),
    ]
}

/// Builds train and test feature matrices from a chronological split.
///
/// History rows only warm up the sliding windows. Rows sharing a
/// timestamp are scored together against strictly earlier state and
/// recorded afterwards, so no transaction ever observes itself or a
/// same-instant peer.
pub fn assemble_features(
    dataset: &SplitDataset,
    scores: &PprScores,
    graph: &TransactionGraph,
    encoder: &ChannelEncoder,
    options: &FeatureOptions,
) -> (FeatureMatrix, FeatureMatrix) {
    #[derive(Clone, Copy, PartialEq)]
    enum Part {
        History,
        Train,
        Test,
    }

    // The split's segments are each (time, id)-sorted and ordered
    // history <= train <= test, with timestamp ties assigned to segments
    // in id order — so plain concatenation is globally sorted.
    let merged: Vec<(&Transaction, Part)> = dataset
        .history
        .iter()
        .map(|t| (t, Part::History))
        .chain(dataset.train.iter().map(|t| (t, Part::Train)))
        .chain(dataset.test.iter().map(|t| (t, Part::Test)))
        .collect();
    debug_assert!(merged
        .windows(2)
        .all(|w| (w[0].0.event_time, &w[0].0.id) <= (w[1].0.event_time, &w[1].0.id)));

    let mut hist = HistoryIndex::new(options.window_days);
    let empty = || FeatureMatrix {
        columns: FEATURE_COLUMNS.iter().map(|c| c.to_string()).collect(),
        rows: Vec::new(),
        labels: Vec::new(),
    };
    let mut train = empty();
    let mut test = empty();

    let mut i = 0;
    while i < merged.len() {
        let batch_time = merged[i].0.event_time;
        let mut j = i;
        while j < merged.len() && merged[j].0.event_time == batch_time {
            j += 1;
        }
        // Score the whole batch against strictly earlier state...
        for &(txn, part) in &merged[i..j] {
            let target = match part {
                Part::History => continue,
                Part::Train => &mut train,
                Part::Test => &mut test,
            };
            target
                .rows
                .push(feature_row(txn, &hist, scores, graph, encoder, options));
            target.labels.push(txn.label);
        }
        // ...then make the batch visible to later timestamps.
        for &(txn, _) in &merged[i..j] {
            hist.record(txn);
        }
        hist.prune(batch_time);
        i = j;
    }
    (train, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exposure::PprScores;
    use crate::graph::build_graph;
    use crate::ingest::{chronological_split, Transaction, TIMESTAMP_FORMAT};
    use proptest::prelude::*;

    fn at(time: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(time, TIMESTAMP_FORMAT).unwrap()
    }

    fn txn_at(id: &str, time: &str, debtor: i64, creditor: i64, cents: i64) -> Transaction {
        let event_time = at(time);
        Transaction {
            id: id.to_string(),
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
    fn first_digit_examples() {
        assert_eq!(first_digit(0.57), 5);
        assert_eq!(first_digit(721.21), 7);
        assert_eq!(first_digit(0.0), 0);
        assert_eq!(first_digit(1000.0), 1);
        assert_eq!(first_digit(999.99), 9);
        assert_eq!(first_digit(0.09), 9);
        assert_eq!(first_digit(5.0), 5);
        assert_eq!(first_digit(0.1), 1);
    }

    proptest! {
        #[test]
        fn first_digit_matches_string_representation(cents in 1i64..10_000_000_000) {
            let amount = cents as f64 / 100.0;
            let text = crate::ingest::format_amount_cents(cents);
            let expected = text
                .chars()
                .find(|c| ('1'..='9').contains(c))
                .map(|c| c as u8 - b'0')
                .unwrap_or(0);
            prop_assert_eq!(first_digit(amount), expected);
        }
    }

    #[test]
    fn channel_encoder_ranks_by_frequency_then_name() {
        let mut train = Vec::new();
        let mut push = |channel: &str, n: usize| {
            for i in 0..n {
                let mut t = txn_at(&format!("{channel}{i}"), "2020-09-01T00:00:00", 1, 2, 100);
                t.channel = channel.to_string();
                train.push(t);
            }
        };
        push("WEB", 3);
        push("BRANCH", 2);
        push("APP", 2);
        push("ATM", 1);
        let encoder = ChannelEncoder::fit(&train);
        assert_eq!(encoder.n_channels(), 4);
        assert_eq!(encoder.encode("WEB"), 0.25);
        assert_eq!(encoder.encode("APP"), 0.5); // ties: APP < BRANCH
        assert_eq!(encoder.encode("BRANCH"), 0.75);
        assert_eq!(encoder.encode("ATM"), 1.0);
        assert_eq!(encoder.encode("CARRIER_PIGEON"), 1.0);
    }

    #[test]
    fn empty_encoder_maps_everything_to_one() {
        let encoder = ChannelEncoder::fit(&[]);
        assert_eq!(encoder.encode("WEB"), 1.0);
    }

    #[test]
    fn day_of_week_counts_same_weekday_in_window() {
        let mut hist = HistoryIndex::new(30);
        // Mondays 2020-08-31 and 2020-09-07, Wednesday 2020-09-09.
        hist.record(&txn_at("a", "2020-08-31T09:00:00", 5, 9, 100));
        hist.record(&txn_at("b", "2020-09-07T09:00:00", 5, 9, 100));
        hist.record(&txn_at("c", "2020-09-09T09:00:00", 5, 9, 100));
        // Scoring a Monday txn: 2 of 3 prior events share the weekday.
        let current = txn_at("d", "2020-09-14T10:00:00", 5, 9, 100);
        assert_eq!(day_of_week_score(&current, &hist), 3.0 / 10.0);
        // A debtor with no history gets the smoothed prior 1/7.
        let stranger = txn_at("e", "2020-09-14T10:00:00", 42, 9, 100);
        assert_eq!(day_of_week_score(&stranger, &hist), 1.0 / 7.0);
    }

    #[test]
    fn window_includes_left_edge_and_excludes_now() {
        let mut hist = HistoryIndex::new(30);
        hist.record(&txn_at("too_old", "2020-08-15T09:59:59", 5, 9, 100));
        hist.record(&txn_at("edge", "2020-08-15T10:00:00", 5, 9, 100));
        hist.record(&txn_at("same_instant", "2020-09-14T10:00:00", 5, 9, 100));
        let current = txn_at("now", "2020-09-14T10:00:00", 5, 9, 100);
        // Only "edge" is inside [t-30d, t): 1 event, same weekday as t?
        // 2020-08-15 is a Saturday, 2020-09-14 a Monday: n_same = 0.
        assert_eq!(day_of_week_score(&current, &hist), 1.0 / 8.0);
        assert_eq!(trx_count_creditor(&current, &hist), 1);
    }

    #[test]
    fn time_of_day_amount_ratio_hand_case() {
        let mut hist = HistoryIndex::new(30);
        hist.record(&txn_at("w1", "2020-08-25T10:00:00", 5, 9, 50_00));
        hist.record(&txn_at("w2", "2020-09-04T10:00:00", 5, 9, 30_00));
        hist.record(&txn_at("r1", "2020-09-12T10:00:00", 5, 9, 12_00));
        hist.record(&txn_at("r2", "2020-09-13T10:00:00", 5, 9, 8_00));
        let current = txn_at("now", "2020-09-14T10:00:00", 5, 9, 100);
        // 7-day average = (12 + 8) / 2 = 10; window average = 100 / 4 = 25.
        assert_eq!(
            time_of_day_score(&current, &hist, TimeOfDayMode::AmountRatio),
            0.4
        );
    }

    #[test]
    fn time_of_day_defaults_and_clipping() {
        let current = txn_at("now", "2020-09-14T10:00:00", 5, 9, 100);
        // Empty history.
        let hist = HistoryIndex::new(30);
        assert_eq!(
            time_of_day_score(&current, &hist, TimeOfDayMode::AmountRatio),
            1.0
        );
        // History exists but nothing in the last 7 days.
        let mut hist = HistoryIndex::new(30);
        hist.record(&txn_at("w", "2020-09-01T00:00:00", 5, 9, 10_00));
        assert_eq!(
            time_of_day_score(&current, &hist, TimeOfDayMode::AmountRatio),
            1.0
        );
        // All-zero window amounts: zero denominator.
        let mut hist = HistoryIndex::new(30);
        hist.record(&txn_at("z", "2020-09-13T00:00:00", 5, 9, 0));
        assert_eq!(
            time_of_day_score(&current, &hist, TimeOfDayMode::AmountRatio),
            1.0
        );
        // One huge recent payment among many old tiny ones: clipped at 10.
        let mut hist = HistoryIndex::new(30);
        for i in 0..20 {
            hist.record(&txn_at(&format!("t{i}"), "2020-08-20T00:00:00", 5, 9, 1));
        }
        hist.record(&txn_at("big", "2020-09-13T00:00:00", 5, 9, 10_000_000));
        assert_eq!(
            time_of_day_score(&current, &hist, TimeOfDayMode::AmountRatio),
            10.0
        );
    }

    #[test]
    fn time_of_day_hour_consistency_counts_matching_hours() {
        let mut hist = HistoryIndex::new(30);
        hist.record(&txn_at("a", "2020-09-10T10:15:00", 5, 9, 100));
        hist.record(&txn_at("b", "2020-09-11T10:45:00", 5, 9, 100));
        hist.record(&txn_at("c", "2020-09-12T22:00:00", 5, 9, 100));
        hist.record(&txn_at("d", "2020-09-13T23:00:00", 5, 9, 100));
        let current = txn_at("now", "2020-09-14T10:30:00", 5, 9, 100);
        // 2 of 4 events share hour 10: (2 + 1) / (4 + 24).
        assert_eq!(
            time_of_day_score(&current, &hist, TimeOfDayMode::HourConsistency),
            3.0 / 28.0
        );
    }

    #[test]
    fn trx_count_creditor_counts_window_inbound() {
        let mut hist = HistoryIndex::new(30);
        hist.record(&txn_at("out", "2020-08-01T00:00:00", 1, 9, 100)); // outside window
        for i in 0..5 {
            hist.record(&txn_at(
                &format!("in{i}"),
                "2020-09-01T00:00:00",
                1 + i,
                9,
                100,
            ));
        }
        hist.record(&txn_at("other", "2020-09-02T00:00:00", 1, 8, 100)); // different creditor
        let current = txn_at("now", "2020-09-14T10:00:00", 7, 9, 100);
        assert_eq!(trx_count_creditor(&current, &hist), 5);
        let elsewhere = txn_at("now2", "2020-09-14T10:00:00", 7, 777, 100);
        assert_eq!(trx_count_creditor(&elsewhere, &hist), 0);
    }

    #[test]
    fn pruning_does_not_change_scores() {
        let mut pruned = HistoryIndex::new(30);
        let mut unpruned = HistoryIndex::new(30);
        let mut time = at("2020-09-01T00:00:00");
        for i in 0..200 {
            let t = txn_at(
                &format!("t{i}"),
                &time.format(TIMESTAMP_FORMAT).to_string(),
                5,
                9,
                100 + i,
            );
            pruned.record(&t);
            unpruned.record(&t);
            if i % 10 == 0 {
                pruned.prune(time);
            }
            time += Duration::hours(13);
        }
        let current = txn_at("now", "2020-12-25T00:00:00", 5, 9, 100);
        assert_eq!(
            day_of_week_score(&current, &pruned),
            day_of_week_score(&current, &unpruned)
        );
        assert_eq!(
            trx_count_creditor(&current, &pruned),
            trx_count_creditor(&current, &unpruned)
        );
        assert_eq!(
            time_of_day_score(&current, &pruned, TimeOfDayMode::AmountRatio),
            time_of_day_score(&current, &unpruned, TimeOfDayMode::AmountRatio)
        );
    }

    fn tiny_dataset() -> SplitDataset {
        // 2 history days, then interleaved activity, including a
        // same-timestamp pair that must not see each other.
        let rows = vec![
            txn_at("h1", "2020-09-01T08:00:00", 1, 2, 10_00),
            txn_at("h2", "2020-09-02T08:00:00", 2, 3, 20_00),
            txn_at("t1", "2020-09-03T09:00:00", 1, 3, 30_00),
            txn_at("t2", "2020-09-03T09:00:00", 2, 3, 40_00),
            txn_at("t3", "2020-09-04T09:00:00", 3, 1, 50_00),
            txn_at("t4", "2020-09-05T09:00:00", 1, 2, 60_00),
            txn_at("t5", "2020-09-06T09:00:00", 2, 1, 70_00),
        ];
        chronological_split(rows, 2, 0.6).unwrap()
    }

    fn assemble_tiny(dataset: &SplitDataset) -> (FeatureMatrix, FeatureMatrix) {
        let all: Vec<Transaction> = dataset
            .history
            .iter()
            .chain(&dataset.train)
            .cloned()
            .collect();
        let graph = build_graph(&all);
        let scores = PprScores::from_scores(vec![0.25; graph.n_nodes()]);
        let encoder = ChannelEncoder::fit(&dataset.train);
        assemble_features(
            dataset,
            &scores,
            &graph,
            &encoder,
            &FeatureOptions::default(),
        )
    }

    #[test]
    fn assemble_produces_aligned_matrices() {
        let dataset = tiny_dataset();
        let (train, test) = assemble_tiny(&dataset);
        assert_eq!(train.columns, FEATURE_COLUMNS.to_vec());
        assert_eq!(train.n_rows(), dataset.train.len());
        assert_eq!(test.n_rows(), dataset.test.len());
        assert_eq!(train.labels.len(), train.n_rows());
        assert_eq!(test.columns, train.columns);
    }

    #[test]
    fn same_timestamp_rows_do_not_observe_each_other() {
        let dataset = tiny_dataset();
        let (train, _) = assemble_tiny(&dataset);
        // t1 and t2 both pay creditor 3 at the same instant; only the
        // history row h2 (creditor 3) precedes them strictly.
        let count_idx = train.column_index("trx_count_creditor").unwrap();
        assert_eq!(train.rows[0][count_idx], 1.0, "t1 sees only h2");
        assert_eq!(train.rows[1][count_idx], 1.0, "t2 sees only h2, not t1");
    }

    #[test]
    fn truncating_future_rows_reproduces_identical_features() {
        let dataset = tiny_dataset();
        let (train, test) = assemble_tiny(&dataset);

        let all: Vec<Transaction> = dataset
            .history
            .iter()
            .chain(&dataset.train)
            .cloned()
            .collect();
        let graph = build_graph(&all);
        let scores = PprScores::from_scores(vec![0.25; graph.n_nodes()]);
        let encoder = ChannelEncoder::fit(&dataset.train);

        let check = |row_txn: &Transaction, expected: &[f64]| {
            let truncated = SplitDataset {
                history: dataset
                    .history
                    .iter()
                    .filter(|t| t.event_time < row_txn.event_time)
                    .cloned()
                    .collect(),
                train: dataset
                    .train
                    .iter()
                    .filter(|t| t.event_time < row_txn.event_time)
                    .cloned()
                    .collect(),
                test: vec![row_txn.clone()],
                boundaries: dataset.boundaries,
            };
            let (_, recomputed) = assemble_features(
                &truncated,
                &scores,
                &graph,
                &encoder,
                &FeatureOptions::default(),
            );
            assert_eq!(recomputed.rows[0], expected, "row {}", row_txn.id);
        };
        for (txn, expected) in dataset.train.iter().zip(&train.rows) {
            check(txn, expected);
        }
        for (txn, expected) in dataset.test.iter().zip(&test.rows) {
            check(txn, expected);
        }
    }

    #[test]
    fn matrix_csv_round_trips_exactly() {
        let matrix = FeatureMatrix {
            columns: FEATURE_COLUMNS.iter().map(|c| c.to_string()).collect(),
            rows: vec![
                vec![721.21, 7.0, 1.0 / 3.0, 5.0, 0.3, 0.4, 0.123456789012345e-7],
                vec![0.01, 1.0, 1.0, 0.0, 1.0 / 7.0, 1.0, f64::MIN_POSITIVE],
            ],
            labels: vec![0, 1],
        };
        let mut buffer = Vec::new();
        matrix.write_csv(&mut buffer).unwrap();
        let parsed = FeatureMatrix::read_csv(buffer.as_slice()).unwrap();
        assert_eq!(parsed, matrix);
    }

    #[test]
    fn without_column_drops_exactly_one() {
        let (train, _) = assemble_tiny(&tiny_dataset());
        let base = train.without_column("ppr").unwrap();
        assert_eq!(base.n_cols(), 6);
        assert!(base.column_index("ppr").is_none());
        assert_eq!(base.labels, train.labels);
        assert!(train.without_column("nonexistent").is_none());
        for (full, reduced) in train.rows.iter().zip(&base.rows) {
            assert_eq!(&full[..6], reduced.as_slice());
        }
    }
}
