//! Pipeline configuration.
//!
//! The on-disk format is a flat key-value file with `[section]` headers:
//!
//! ```text
//! # fraud pipeline settings
//! [run]
//! seed = 42
//! mode = both
//!
//! [split]
//! history_days = 14
//! train_fraction = 0.7
//! ```
//!
//! Every setting is addressed as `section.key` and can be overridden on
//! the command line with a flag of the same name (`--split.train_fraction
//! 0.8`). Unknown keys are hard errors — a typo must never silently fall
//! back to a default.

use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

use crate::exposure::{ExposureMode, PprParams, WeightMode};
use crate::features::{FeatureOptions, TimeOfDayMode};
use crate::ingest::DATE_FORMAT;
use crate::model::{ClassWeighting, TrainParams};
use crate::synth::SynthConfig;

/// Errors raised while reading or validating configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
}

/// Which model(s) the pipeline trains and evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RunMode {
    /// Six baseline features only.
    Baseline,
    /// Baseline plus the `ppr` exposure feature.
    WithPpr,
    /// Both models on the identical split, plus a ΔAUC comparison.
    #[default]
    Both,
}

impl RunMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Baseline => "baseline",
            RunMode::WithPpr => "with_ppr",
            RunMode::Both => "both",
        }
    }
}

/// Full pipeline settings with defaults for every field.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Existing ledger CSV; when absent the pipeline synthesizes one.
    pub ledger_path: Option<PathBuf>,
    /// Keep only rows with exactly this status.
    pub status_filter: String,
    /// Directory for every emitted artifact.
    pub output_dir: PathBuf,
    /// Master seed; the synth generator derives from it.
    pub seed: u64,
    pub mode: RunMode,
    pub synth: SynthConfig,
    /// Leading calendar days used only to warm up window features.
    pub history_days: u32,
    pub train_fraction: f64,
    pub ppr: PprParams,
    pub exposure_mode: ExposureMode,
    pub features: FeatureOptions,
    pub train: TrainParams,
    pub psi_bins: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            ledger_path: None,
            status_filter: "Initiated".to_owned(),
            output_dir: PathBuf::from("out"),
            seed: 42,
            mode: RunMode::Both,
            synth: SynthConfig::default(),
            history_days: 14,
            train_fraction: 0.7,
            ppr: PprParams::default(),
            exposure_mode: ExposureMode::Sum,
            features: FeatureOptions::default(),
            train: TrainParams::default(),
            psi_bins: 10,
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_owned(),
        reason: reason.into(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| invalid(key, e.to_string()))
}

/// `NAME:WEIGHT,NAME:WEIGHT,...` into channel sampling weights.
fn parse_channels(key: &str, value: &str) -> Result<Vec<(String, f64)>, ConfigError> {
    let mut channels = Vec::new();
    for part in value.split(',') {
        let part = part.trim();
        let (name, weight) = part
            .split_once(':')
            .ok_or_else(|| invalid(key, format!("`{part}` is not NAME:WEIGHT")))?;
        let weight: f64 = weight
            .trim()
            .parse()
            .map_err(|_| invalid(key, format!("weight `{weight}` is not a number")))?;
        channels.push((name.trim().to_owned(), weight));
    }
    Ok(channels)
}

impl PipelineConfig {
    /// Reads a config file and applies its pairs over the defaults.
    ///
    /// # Errors
    ///
    /// [`ConfigError`] on I/O failure, syntax errors, unknown keys, or
    /// unparseable values.
    pub fn from_file(path: &std::path::Path) -> Result<PipelineConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let mut config = PipelineConfig::default();
        for (key, value) in parse_pairs(&text)? {
            config.apply_pair(&key, &value)?;
        }
        Ok(config)
    }

    /// Applies one `section.key = value` setting.
    ///
    /// # Errors
    ///
    /// [`ConfigError::UnknownKey`] / [`ConfigError::InvalidValue`].
    pub fn apply_pair(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "input.ledger" => self.ledger_path = Some(PathBuf::from(value)),
            "input.status" => self.status_filter = value.to_owned(),
            "output.dir" => self.output_dir = PathBuf::from(value),
            "run.seed" => self.seed = parse_num(key, value)?,
            "run.mode" => {
                self.mode = match value {
                    "baseline" => RunMode::Baseline,
                    "with_ppr" => RunMode::WithPpr,
                    "both" => RunMode::Both,
                    other => {
                        return Err(invalid(
                            key,
                            format!("`{other}` is not one of baseline, with_ppr, both"),
                        ))
                    }
                }
            }
            "synth.n_accounts" => self.synth.n_accounts = parse_num(key, value)?,
            "synth.n_transactions" => self.synth.n_transactions = parse_num(key, value)?,
            "synth.span_days" => self.synth.span_days = parse_num(key, value)?,
            "synth.fraud_rate" => self.synth.fraud_rate = parse_num(key, value)?,
            "synth.n_rings" => self.synth.n_rings = parse_num(key, value)?,
            "synth.ring_size" => self.synth.ring_size = parse_num(key, value)?,
            "synth.initiated_fraction" => self.synth.initiated_fraction = parse_num(key, value)?,
            "synth.channels" => self.synth.channels = parse_channels(key, value)?,
            "synth.amount_mu" => self.synth.amount_lognormal.0 = parse_num(key, value)?,
            "synth.amount_sigma" => self.synth.amount_lognormal.1 = parse_num(key, value)?,
            "synth.start_date" => {
                self.synth.start_date = NaiveDate::parse_from_str(value, DATE_FORMAT)
                    .map_err(|e| invalid(key, e.to_string()))?
            }
            "split.history_days" => self.history_days = parse_num(key, value)?,
            "split.train_fraction" => self.train_fraction = parse_num(key, value)?,
            "ppr.alpha" => self.ppr.alpha = parse_num(key, value)?,
            "ppr.tol" => self.ppr.tol = parse_num(key, value)?,
            "ppr.max_iter" => self.ppr.max_iter = parse_num(key, value)?,
            "ppr.weight_mode" => {
                self.ppr.weight_mode = match value {
                    "count" => WeightMode::Count,
                    "amount" => WeightMode::Amount,
                    "unweighted" => WeightMode::Unweighted,
                    other => {
                        return Err(invalid(
                            key,
                            format!("`{other}` is not one of count, amount, unweighted"),
                        ))
                    }
                }
            }
            "ppr.exposure_mode" => {
                self.exposure_mode = match value {
                    "sum" => ExposureMode::Sum,
                    "max" => ExposureMode::Max,
                    "creditor_only" => ExposureMode::CreditorOnly,
                    other => {
                        return Err(invalid(
                            key,
                            format!("`{other}` is not one of sum, max, creditor_only"),
                        ))
                    }
                }
            }
            "features.window_days" => self.features.window_days = parse_num(key, value)?,
            "features.time_of_day" => {
                self.features.time_of_day_mode = match value {
                    "amount_ratio" => TimeOfDayMode::AmountRatio,
                    "hour_consistency" => TimeOfDayMode::HourConsistency,
                    other => {
                        return Err(invalid(
                            key,
                            format!("`{other}` is not one of amount_ratio, hour_consistency"),
                        ))
                    }
                }
            }
            "train.learning_rate" => self.train.learning_rate = parse_num(key, value)?,
            "train.l2_lambda" => self.train.l2_lambda = parse_num(key, value)?,
            "train.max_epochs" => self.train.max_epochs = parse_num(key, value)?,
            "train.loss_tol" => self.train.loss_tol = parse_num(key, value)?,
            "train.class_weighting" => {
                self.train.class_weighting = match value {
                    "none" => ClassWeighting::None,
                    "balanced" => ClassWeighting::Balanced,
                    other => {
                        return Err(invalid(
                            key,
                            format!("`{other}` is not one of none, balanced"),
                        ))
                    }
                }
            }
            "psi.bins" => self.psi_bins = parse_num(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_owned())),
        }
        Ok(())
    }

    /// Cross-field checks, run once after all pairs are applied. Also
    /// propagates the master seed into the synth section so one knob
    /// controls all randomness.
    ///
    /// # Errors
    ///
    /// [`ConfigError::InvalidValue`] naming the offending key.
    pub fn finalize(&mut self) -> Result<(), ConfigError> {
        self.synth.seed = self.seed;
        self.features.exposure_mode = self.exposure_mode;
        self.synth
            .validate()
            .map_err(|e| invalid("synth", e.to_string()))?;
        self.ppr
            .validate()
            .map_err(|e| invalid("ppr", e.to_string()))?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(invalid(
                "split.train_fraction",
                format!("{} is outside (0, 1)", self.train_fraction),
            ));
        }
        if self.features.window_days == 0 {
            return Err(invalid("features.window_days", "must be at least 1"));
        }
        if self.psi_bins == 0 {
            return Err(invalid("psi.bins", "must be at least 1"));
        }
        if self.train.learning_rate <= 0.0 || !self.train.learning_rate.is_finite() {
            return Err(invalid(
                "train.learning_rate",
                format!("{} is not a positive real", self.train.learning_rate),
            ));
        }
        if self.train.l2_lambda < 0.0 || !self.train.l2_lambda.is_finite() {
            return Err(invalid(
                "train.l2_lambda",
                format!("{} is not a non-negative real", self.train.l2_lambda),
            ));
        }
        if self.status_filter.is_empty() {
            return Err(invalid("input.status", "must not be empty"));
        }
        Ok(())
    }
}

/// Parses the `[section]` / `key = value` text into ordered
/// `section.key` pairs. `#` and `;` start comments; blank lines are
/// skipped; keys before any section header are rejected.
///
/// # Errors
///
/// [`ConfigError::Syntax`] with the 1-based line number.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax {
                    line: idx + 1,
                    reason: "unterminated section header".to_owned(),
                })?
                .trim();
            if name.is_empty() {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    reason: "empty section name".to_owned(),
                });
            }
            section = Some(name.to_owned());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: idx + 1,
            reason: format!("expected `key = value`, got `{line}`"),
        })?;
        let section = section.as_ref().ok_or_else(|| ConfigError::Syntax {
            line: idx + 1,
            reason: "key appears before any [section] header".to_owned(),
        })?;
        pairs.push((format!("{section}.{}", key.trim()), value.trim().to_owned()));
    }
    Ok(pairs)
}
