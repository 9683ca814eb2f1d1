//! Ledger parsing, validation, status filtering, and chronological splits.
//!
//! The ledger is a CSV file with one row per transaction. Columns are
//! resolved by name through a [`LedgerSchema`], so files whose headers
//! deviate from the defaults can still be ingested by remapping. Amounts
//! are stored internally as integer cents, which keeps edge-weight sums
//! exact and lets a parsed ledger round-trip to the identical text.

use std::fmt;
use std::io::{Read, Write};

use chrono::{Duration, NaiveDate, NaiveDateTime};
use thiserror::Error;

/// Timestamp layout used across the ledger and all derived artifacts.
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// Date layout used for execution dates.
pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Errors raised while reading or splitting a ledger.
#[derive(Debug, Error)]
pub enum IngestError {
    /// Underlying I/O failure while reading the source.
    #[error("ledger I/O error: {0}")]
    Io(#[from] std::io::Error),
    /// The CSV itself is structurally broken (bad quoting, ragged rows).
    #[error("ledger CSV error: {0}")]
    Csv(#[from] csv::Error),
    /// A required column is absent from the header row.
    #[error("ledger is missing required column `{0}`")]
    MissingColumn(String),
    /// A row failed validation; `line` is the 1-based CSV line number.
    #[error("malformed ledger row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    /// No transactions remain once the history window is carved off.
    #[error("no transactions remain after the {history_days}-day history window")]
    EmptyAfterHistory { history_days: u32 },
    /// The train fraction must lie strictly between 0 and 1.
    #[error("train fraction must be in (0, 1), got {0}")]
    InvalidTrainFraction(f64),
}

/// A single ledger row with all fields validated and typed.
///
/// `amount_cents` holds the transaction amount in integer cents; use
/// [`Transaction::amount`] for the value in currency units. Account and
/// party identifiers are the signed 64-bit hashes from the source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub id: String,
    pub event_time: NaiveDateTime,
    pub amount_cents: i64,
    pub currency: String,
    pub execution_date: NaiveDate,
    pub txn_type: String,
    pub status: String,
    pub channel: String,
    /// Fraud label: 0 = legitimate, 1 = fraudulent.
    pub label: u8,
    pub debtor_account: i64,
    pub creditor_account: i64,
    pub party_id: i64,
    pub source_ip: i64,
    pub session_id: i64,
    pub creditor_party_id: i64,
}

impl Transaction {
    /// Amount in currency units (euros), reconstructed from integer cents.
    pub fn amount(&self) -> f64 {
        self.amount_cents as f64 / 100.0
    }
}

/// Maps the typed fields of [`Transaction`] to CSV column names.
///
/// The defaults match the ledger layout produced by [`crate::synth`];
/// override individual names to ingest files with different headers.
#[derive(Debug, Clone)]
pub struct LedgerSchema {
    pub id: String,
    pub event_time: String,
    pub amount: String,
    pub currency: String,
    pub execution_date: String,
    pub txn_type: String,
    pub status: String,
    pub channel: String,
    pub label: String,
    pub debtor_account: String,
    pub creditor_account: String,
    pub party_id: String,
    pub source_ip: String,
    pub session_id: String,
    pub creditor_party_id: String,
}

impl Default for LedgerSchema {
    fn default() -> Self {
        LedgerSchema {
            id: "id".into(),
            event_time: "eventtimecet".into(),
            amount: "trxamount".into(),
            currency: "currency".into(),
            execution_date: "transactionexecutiondate".into(),
            txn_type: "transactiontype".into(),
            status: "trxstatus".into(),
            channel: "channel".into(),
            label: "label".into(),
            debtor_account: "debtoraccountnumberhash".into(),
            creditor_account: "creditoraccountnumberhash".into(),
            party_id: "partyidhash".into(),
            source_ip: "sourceiphash".into(),
            session_id: "sessionidhash".into(),
            creditor_party_id: "creditoraccountpartyidhash".into(),
        }
    }
}

impl LedgerSchema {
    /// Column names in canonical file order.
    fn columns(&self) -> [&str; 15] {
        [
            &self.id,
            &self.event_time,
            &self.amount,
            &self.currency,
            &self.execution_date,
            &self.txn_type,
            &self.status,
            &self.channel,
            &self.label,
            &self.debtor_account,
            &self.creditor_account,
            &self.party_id,
            &self.source_ip,
            &self.session_id,
            &self.creditor_party_id,
        ]
    }
}

/// Parses a non-negative decimal amount with at most two fractional digits
/// into integer cents. Rejects signs, exponents, and anything that would
/// lose precision, so serialization is an exact inverse.
pub fn parse_amount_cents(text: &str) -> Result<i64, String> {
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(format!("empty amount `{text}`"));
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("amount `{text}` is not a non-negative decimal"));
    }
    if frac.len() > 2 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!(
            "amount `{text}` must have at most two fractional digits"
        ));
    }
    let whole_part: i64 = if whole.is_empty() {
        0
    } else {
        whole
            .parse()
            .map_err(|_| format!("amount `{text}` is out of range"))?
    };
    let mut frac_part: i64 = if frac.is_empty() {
        0
    } else {
        frac.parse().unwrap()
    };
    if frac.len() == 1 {
        frac_part *= 10;
    }
    whole_part
        .checked_mul(100)
        .and_then(|c| c.checked_add(frac_part))
        .ok_or_else(|| format!("amount `{text}` is out of range"))
}

/// Formats integer cents as a decimal with exactly two fractional digits.
pub fn format_amount_cents(cents: i64) -> String {
    format!("{}.{:02}", cents / 100, cents % 100)
}

struct ColumnIndices {
    id: usize,
    event_time: usize,
    amount: usize,
    currency: usize,
    execution_date: usize,
    txn_type: usize,
    status: usize,
    channel: usize,
    label: usize,
    debtor_account: usize,
    creditor_account: usize,
    party_id: usize,
    source_ip: usize,
    session_id: usize,
    creditor_party_id: usize,
}

impl ColumnIndices {
    fn resolve(headers: &csv::StringRecord, schema: &LedgerSchema) -> Result<Self, IngestError> {
        let find = |name: &str| -> Result<usize, IngestError> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
        };
        Ok(ColumnIndices {
            id: find(&schema.id)?,
            event_time: find(&schema.event_time)?,
            amount: find(&schema.amount)?,
            currency: find(&schema.currency)?,
            execution_date: find(&schema.execution_date)?,
            txn_type: find(&schema.txn_type)?,
            status: find(&schema.status)?,
            channel: find(&schema.channel)?,
            label: find(&schema.label)?,
            debtor_account: find(&schema.debtor_account)?,
            creditor_account: find(&schema.creditor_account)?,
            party_id: find(&schema.party_id)?,
            source_ip: find(&schema.source_ip)?,
            session_id: find(&schema.session_id)?,
            creditor_party_id: find(&schema.creditor_party_id)?,
        })
    }
}

fn malformed(line: u64, reason: impl fmt::Display) -> IngestError {
    IngestError::MalformedRow {
        line,
        reason: reason.to_string(),
    }
}

/// Reads and validates a ledger CSV.
///
/// Every row must carry a parseable timestamp, a non-negative amount with
/// at most two fractional digits, a label in `{0, 1}`, and non-zero
/// debtor/creditor account hashes. The first offending row aborts the
/// parse with its line number.
///
/// # Errors
///
/// [`IngestError::MissingColumn`] if the header lacks a schema column and
/// [`IngestError::MalformedRow`] for the first invalid row.
pub fn parse_ledger<R: Read>(
    reader: R,
    schema: &LedgerSchema,
) -> Result<Vec<Transaction>, IngestError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let cols = ColumnIndices::resolve(&headers, schema)?;

    let mut transactions = Vec::new();
    for result in csv_reader.records() {
        let record = result?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |idx: usize| -> &str { record.get(idx).unwrap_or("") };

        let event_time = NaiveDateTime::parse_from_str(field(cols.event_time), TIMESTAMP_FORMAT)
            .map_err(|e| {
                malformed(
                    line,
                    format!("bad event time `{}`: {e}", field(cols.event_time)),
                )
            })?;
        let execution_date = NaiveDate::parse_from_str(field(cols.execution_date), DATE_FORMAT)
            .map_err(|e| {
                malformed(
                    line,
                    format!("bad execution date `{}`: {e}", field(cols.execution_date)),
                )
            })?;
        let amount_cents =
            parse_amount_cents(field(cols.amount)).map_err(|e| malformed(line, e))?;
        let label: u8 = field(cols.label)
            .parse()
            .ok()
            .filter(|l| *l <= 1)
            .ok_or_else(|| {
                malformed(
                    line,
                    format!("label must be 0 or 1, got `{}`", field(cols.label)),
                )
            })?;
        let parse_hash = |idx: usize, what: &str| -> Result<i64, IngestError> {
            field(idx)
                .parse::<i64>()
                .map_err(|_| malformed(line, format!("bad {what} hash `{}`", field(idx))))
        };
        let debtor_account = parse_hash(cols.debtor_account, "debtor account")?;
        let creditor_account = parse_hash(cols.creditor_account, "creditor account")?;
        if debtor_account == 0 || creditor_account == 0 {
            return Err(malformed(line, "account hashes must be non-zero"));
        }

        transactions.push(Transaction {
            id: field(cols.id).to_string(),
            event_time,
            amount_cents,
            currency: field(cols.currency).to_string(),
            execution_date,
            txn_type: field(cols.txn_type).to_string(),
            status: field(cols.status).to_string(),
            channel: field(cols.channel).to_string(),
            label,
            debtor_account,
            creditor_account,
            party_id: parse_hash(cols.party_id, "party id")?,
            source_ip: parse_hash(cols.source_ip, "source ip")?,
            session_id: parse_hash(cols.session_id, "session id")?,
            creditor_party_id: parse_hash(cols.creditor_party_id, "creditor party id")?,
        });
    }
    Ok(transactions)
}

/// Writes transactions as a ledger CSV using the schema's column names.
///
/// The emitted text parses back (via [`parse_ledger`]) to field-identical
/// transactions, which also makes the output byte-deterministic.
pub fn write_ledger<W: Write>(
    writer: W,
    transactions: &[Transaction],
    schema: &LedgerSchema,
) -> Result<(), IngestError> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(schema.columns())?;
    for t in transactions {
        csv_writer.write_record([
            t.id.as_str(),
            &t.event_time.format(TIMESTAMP_FORMAT).to_string(),
            &format_amount_cents(t.amount_cents),
            &t.currency,
            &t.execution_date.format(DATE_FORMAT).to_string(),
            &t.txn_type,
            &t.status,
            &t.channel,
            &t.label.to_string(),
            &t.debtor_account.to_string(),
            &t.creditor_account.to_string(),
            &t.party_id.to_string(),
            &t.source_ip.to_string(),
            &t.session_id.to_string(),
            &t.creditor_party_id.to_string(),
        ])?;
    }
    csv_writer.flush().map_err(IngestError::from)?;
    Ok(())
}

/// Keeps only transactions whose status matches `status` exactly
/// (case-sensitive), preserving order.
pub fn filter_status(transactions: Vec<Transaction>, status: &str) -> Vec<Transaction> {
    let mut kept = transactions;
    kept.retain(|t| t.status == status);
    kept
}

/// A chronological partition of the ledger into history, train, and test.
///
/// Every history row precedes every train row, and every train row
/// precedes every test row, under the total order `(event_time, id)`.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    /// Warm-up rows used only to seed sliding-window feature state.
    pub history: Vec<Transaction>,
    pub train: Vec<Transaction>,
    pub test: Vec<Transaction>,
    /// `(history_end, test_start)`: the first instant no longer in
    /// history, and the event time of the first test row (or of the last
    /// train row when the test set would be empty).
    pub boundaries: (NaiveDateTime, NaiveDateTime),
}

/// Splits a ledger chronologically into history, train, and test sets.
///
/// Rows are ordered by `(event_time, id)`. The history segment covers the
/// first `history_days` calendar days starting at the earliest row's
/// date; of the remainder, the earliest `floor(n * train_fraction)` rows
/// become the train set and the rest the test set.
///
/// # Errors
///
/// [`IngestError::EmptyAfterHistory`] when nothing remains to split, and
/// [`IngestError::InvalidTrainFraction`] when the fraction is not in
/// `(0, 1)`.
pub fn chronological_split(
    transactions: Vec<Transaction>,
    history_days: u32,
    train_fraction: f64,
) -> Result<SplitDataset, IngestError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(IngestError::InvalidTrainFraction(train_fraction));
    }
    let mut rows = transactions;
    rows.sort_by(|a, b| (a.event_time, &a.id).cmp(&(b.event_time, &b.id)));
    if rows.is_empty() {
        return Err(IngestError::EmptyAfterHistory { history_days });
    }

    let first_day = rows[0].event_time.date();
    let history_end = (first_day + Duration::days(i64::from(history_days)))
        .and_hms_opt(0, 0, 0)
        .expect("midnight is always a valid time");
    let n_history = rows.partition_point(|t| t.event_time < history_end);
    let remainder = rows.split_off(n_history);
    let history = rows;
    if remainder.is_empty() {
        return Err(IngestError::EmptyAfterHistory { history_days });
    }

    // The small epsilon absorbs binary-fraction fuzz (e.g. 0.7 * 10 being
    // representable just below 7.0) without ever shifting an exact case.
    let n = remainder.len();
    let n_train = ((n as f64) * train_fraction + 1e-9).floor() as usize;
    let n_train = n_train.min(n);
    let mut train = remainder;
    let test = train.split_off(n_train);

    let test_start = test
        .first()
        .or_else(|| train.last())
        .map(|t| t.event_time)
        .unwrap_or(history_end);
    Ok(SplitDataset {
        history,
        train,
        test,
        boundaries: (history_end, test_start),
    })
}
