//! Synthetic labeled ledger generation with injected fraud rings.
//!
//! The generator produces a ledger that is statistically plausible enough
//! to exercise the full pipeline: lognormal amounts, categorical channels,
//! Bernoulli status and fraud labels, and uniform account pairings over a
//! fixed pool. [`inject_rings`] then reroutes every fraud-labeled row so
//! its creditor is a ring member ("mule"), concentrating fraudulent inflow
//! on a small set of accounts the way coordinated mule networks do.
//!
//! All draws come from counter-based ChaCha streams derived from a single
//! seed, so equal configurations yield byte-identical ledgers.

use std::collections::HashSet;
use std::io::Write;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use thiserror::Error;

use crate::ingest::Transaction;

/// Errors raised by configuration validation or generation.
#[derive(Debug, Error)]
pub enum SynthError {
    /// Channel weights must be non-negative and sum to 1 within 1e-9.
    #[error("channel weights must sum to 1 (got {sum}); weights must be non-negative")]
    ChannelWeightSum { sum: f64 },
    /// More ring slots were requested than accounts exist.
    #[error("ring capacity exceeded: {needed} ring slots but only {available} accounts")]
    RingCapacityExceeded { needed: usize, available: usize },
    /// A probability-like parameter fell outside `[0, 1]`.
    #[error("{name} must be in [0, 1], got {value}")]
    RateOutOfRange { name: &'static str, value: f64 },
    /// A structural parameter is unusable (too few accounts, zero span...).
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
}

/// Parameters for [`generate_ledger`] and [`inject_rings`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Master seed; all internal streams derive from it.
    pub seed: u64,
    pub n_accounts: usize,
    pub n_transactions: usize,
    /// Calendar span of the ledger; event times are uniform over it.
    pub span_days: u32,
    /// Probability that a row is labeled fraudulent.
    pub fraud_rate: f64,
    pub n_rings: usize,
    pub ring_size: usize,
    /// Probability that a row's status is `Initiated` (vs `Completed`).
    pub initiated_fraction: f64,
    /// Channel names with their sampling weights (must sum to 1).
    pub channels: Vec<(String, f64)>,
    /// `(mu, sigma)` of the lognormal amount distribution, in log-euros.
    pub amount_lognormal: (f64, f64),
    /// First calendar day of the ledger.
    pub start_date: NaiveDate,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            n_accounts: 5_000,
            n_transactions: 100_000,
            span_days: 365,
            fraud_rate: 0.005,
            n_rings: 20,
            ring_size: 4,
            initiated_fraction: 0.47,
            channels: vec![
                ("DIRECT_WEB".to_string(), 0.55),
                ("MOBILE_APP".to_string(), 0.35),
                ("BRANCH".to_string(), 0.10),
            ],
            amount_lognormal: (4.0, 1.0),
            start_date: NaiveDate::from_ymd_opt(2020, 9, 1).expect("valid date"),
        }
    }
}

impl SynthConfig {
    /// Checks every parameter, returning the first violation.
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_accounts < 2 {
            return Err(SynthError::InvalidParam {
                name: "n_accounts",
                reason: format!("need at least 2 accounts, got {}", self.n_accounts),
            });
        }
        if self.span_days == 0 {
            return Err(SynthError::InvalidParam {
                name: "span_days",
                reason: "span must cover at least one day".to_string(),
            });
        }
        for (name, value) in [
            ("fraud_rate", self.fraud_rate),
            ("initiated_fraction", self.initiated_fraction),
        ] {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(SynthError::RateOutOfRange { name, value });
            }
        }
        if self.channels.is_empty() || self.channels.iter().any(|(_, w)| *w < 0.0) {
            let sum = self.channels.iter().map(|(_, w)| w).sum();
            return Err(SynthError::ChannelWeightSum { sum });
        }
        let sum: f64 = self.channels.iter().map(|(_, w)| w).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SynthError::ChannelWeightSum { sum });
        }
        let (mu, sigma) = self.amount_lognormal;
        if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
            return Err(SynthError::InvalidParam {
                name: "amount_lognormal",
                reason: format!("mu={mu}, sigma={sigma}"),
            });
        }
        if self.n_rings > 0 && self.ring_size == 0 {
            return Err(SynthError::InvalidParam {
                name: "ring_size",
                reason: "rings must have at least one member".to_string(),
            });
        }
        Ok(())
    }
}

/// One ring membership record: `account` belongs to ring `ring_id`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RingAssignment {
    pub ring_id: u32,
    pub account: i64,
}

// Independent deterministic streams derived from the master seed. The
// account pool stream is shared by generation and ring injection so both
// see the same account universe without passing it around.
const ACCOUNT_STREAM: u64 = 0;
const ROW_STREAM: u64 = 1;
const RING_STREAM: u64 = 2;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Draws the deterministic account pool for a configuration: distinct
/// non-zero account hashes and their owning party hashes.
fn account_pool(config: &SynthConfig) -> (Vec<i64>, Vec<i64>) {
    let mut rng = stream_rng(config.seed, ACCOUNT_STREAM);
    let mut seen = HashSet::with_capacity(config.n_accounts * 2);
    let mut draw_distinct = |rng: &mut ChaCha8Rng| loop {
        let value: i64 = rng.random();
        if value != 0 && seen.insert(value) {
            return value;
        }
    };
    let accounts: Vec<i64> = (0..config.n_accounts)
        .map(|_| draw_distinct(&mut rng))
        .collect();
    let parties: Vec<i64> = (0..config.n_accounts)
        .map(|_| draw_distinct(&mut rng))
        .collect();
    (accounts, parties)
}

/// Generates a labeled synthetic ledger, sorted chronologically.
///
/// Transaction ids are assigned after the time sort as zero-padded
/// sequential numbers, so lexicographic id order equals time order and
/// ties stay stable. Amounts are lognormal draws rounded to whole cents.
///
/// # Errors
///
/// Any [`SynthConfig::validate`] failure.
pub fn generate_ledger(config: &SynthConfig) -> Result<Vec<Transaction>, SynthError> {
    config.validate()?;
    let (accounts, parties) = account_pool(config);
    let mut rng = stream_rng(config.seed, ROW_STREAM);
    let amount_dist = LogNormal::new(config.amount_lognormal.0, config.amount_lognormal.1)
        .map_err(|e| SynthError::InvalidParam {
            name: "amount_lognormal",
            reason: e.to_string(),
        })?;
    let span_seconds = i64::from(config.span_days) * 86_400;
    let start = config
        .start_date
        .and_hms_opt(0, 0, 0)
        .expect("midnight is always a valid time");

    struct Draft {
        offset_seconds: i64,
        debtor_idx: usize,
        creditor_idx: usize,
        amount_cents: i64,
        status: &'static str,
        label: u8,
        channel_idx: usize,
        source_ip: i64,
        session_id: i64,
    }

    let mut drafts = Vec::with_capacity(config.n_transactions);
    for _ in 0..config.n_transactions {
        let offset_seconds = rng.random_range(0..span_seconds);
        let debtor_idx = rng.random_range(0..config.n_accounts);
        let creditor_idx = loop {
            let idx = rng.random_range(0..config.n_accounts);
            if idx != debtor_idx {
                break idx;
            }
        };
        // Round to whole cents and cap far beyond any plausible draw so a
        // pathological tail sample cannot overflow the cents field.
        let amount_euros: f64 = amount_dist.sample(&mut rng);
        let amount_cents = (amount_euros * 100.0).round().min(1e15) as i64;
        let status = if rng.random_bool(config.initiated_fraction) {
            "Initiated"
        } else {
            "Completed"
        };
        let label = u8::from(rng.random_bool(config.fraud_rate));
        let channel_pick: f64 = rng.random();
        let mut cumulative = 0.0;
        let mut channel_idx = config.channels.len() - 1;
        for (i, (_, weight)) in config.channels.iter().enumerate() {
            cumulative += weight;
            if channel_pick < cumulative {
                channel_idx = i;
                break;
            }
        }
        drafts.push(Draft {
            offset_seconds,
            debtor_idx,
            creditor_idx,
            amount_cents,
            status,
            label,
            channel_idx,
            source_ip: rng.random(),
            session_id: rng.random(),
        });
    }

    // Stable sort: rows at the same second keep generation order, and the
    // sequential ids assigned below make that order reproducible downstream.
    drafts.sort_by_key(|d| d.offset_seconds);

    let ledger = drafts
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let event_time = start + Duration::seconds(d.offset_seconds);
            Transaction {
                id: format!("{:09}", 100_000_000 + i),
                event_time,
                amount_cents: d.amount_cents,
                currency: "EUR".to_string(),
                execution_date: event_time.date(),
                txn_type: "Domestic".to_string(),
                status: d.status.to_string(),
                channel: config.channels[d.channel_idx].0.clone(),
                label: d.label,
                debtor_account: accounts[d.debtor_idx],
                creditor_account: accounts[d.creditor_idx],
                party_id: parties[d.debtor_idx],
                source_ip: d.source_ip,
                session_id: d.session_id,
                creditor_party_id: parties[d.creditor_idx],
            }
        })
        .collect();
    Ok(ledger)
}

/// How many consecutive fraud rows a single mule collects before the
/// rotation moves on. Real mule accounts receive short bursts of
/// inbound payments while they are "active", then go quiet; a burst
/// also means a fraud row's creditor usually has recent fraudulent
/// inflows, which is what makes recipient-history features informative.
const MULE_RUN_LENGTH: usize = 4;

/// Reroutes every fraud-labeled row's creditor to a ring member.
///
/// Mule accounts are sampled without replacement from the same account
/// pool that produced `ledger` (the config must match). Fraud rows are
/// assigned in chronological runs of [`MULE_RUN_LENGTH`], rotating
/// round-robin across the flattened mule list, so each mule collects a
/// short burst of inflows before the next takes over; whenever there
/// are at least `MULE_RUN_LENGTH * (mules - 1) + 1` fraud rows, every
/// mule receives at least one. Only `creditor_account` and
/// `creditor_party_id` change; labels, amounts, and times are untouched.
///
/// # Errors
///
/// [`SynthError::RingCapacityExceeded`] when `n_rings * ring_size`
/// exceeds `n_accounts`, plus any validation failure.
pub fn inject_rings(
    ledger: Vec<Transaction>,
    config: &SynthConfig,
) -> Result<(Vec<Transaction>, Vec<RingAssignment>), SynthError> {
    config.validate()?;
    let total_mules = config.n_rings * config.ring_size;
    if total_mules == 0 {
        return Ok((ledger, Vec::new()));
    }
    if total_mules > config.n_accounts {
        return Err(SynthError::RingCapacityExceeded {
            needed: total_mules,
            available: config.n_accounts,
        });
    }

    let (accounts, parties) = account_pool(config);
    let mut rng = stream_rng(config.seed, RING_STREAM);
    let mule_indices: Vec<usize> =
        rand::seq::index::sample(&mut rng, config.n_accounts, total_mules).into_vec();

    let assignments: Vec<RingAssignment> = mule_indices
        .iter()
        .enumerate()
        .map(|(slot, &account_idx)| RingAssignment {
            ring_id: (slot / config.ring_size) as u32,
            account: accounts[account_idx],
        })
        .collect();

    let mut rerouted = ledger;
    let mut fraud_counter = 0usize;
    for row in rerouted.iter_mut() {
        if row.label == 1 {
            let account_idx = mule_indices[(fraud_counter / MULE_RUN_LENGTH) % total_mules];
            row.creditor_account = accounts[account_idx];
            row.creditor_party_id = parties[account_idx];
            fraud_counter += 1;
        }
    }
    Ok((rerouted, assignments))
}

/// Generates a ledger and injects rings in one step.
pub fn generate_with_rings(
    config: &SynthConfig,
) -> Result<(Vec<Transaction>, Vec<RingAssignment>), SynthError> {
    let ledger = generate_ledger(config)?;
    inject_rings(ledger, config)
}

/// Writes the ring membership table as CSV.
pub fn write_rings<W: Write>(
    writer: W,
    assignments: &[RingAssignment],
) -> Result<(), std::io::Error> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer
        .write_record(["ring_id", "accountnumberhash"])
        .map_err(io_error)?;
    for a in assignments {
        csv_writer
            .write_record([a.ring_id.to_string(), a.account.to_string()])
            .map_err(io_error)?;
    }
    csv_writer.flush()
}

fn io_error(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}
