//! Stage orchestration and artifact plumbing.
//!
//! Every stage reads its inputs from files in the output directory (or
//! the configured ledger path) and writes its products back there, so a
//! full [`run_pipeline`] is literally the sequential composition of the
//! per-stage entry points — cached-stage runs and end-to-end runs cannot
//! diverge, because they execute the same code against the same bytes.
//!
//! All artifacts are plain CSV/JSON. Every emitted file is recorded in
//! `manifest.json` as `name -> sha256 hex`, and all numeric output goes
//! through the shortest-round-trip float formatter, so identical configs
//! yield byte-identical artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{PipelineConfig, RunMode};
use crate::evaluation::{evaluate_scores, psi, EvalError, MetricsReport, PsiEntry};
use crate::exposure::{
    build_personalization, compute_ppr, read_scores, scores_for_graph, write_scores, ExposureError,
    PprScores,
};
use crate::features::{assemble_features, ChannelEncoder, FeatureMatrix};
use crate::graph::{build_graph, GraphStats, TransactionGraph};
use crate::ingest::{
    chronological_split, filter_status, parse_ledger, write_ledger, IngestError, LedgerSchema,
    SplitDataset,
};
use crate::model::{feature_importance, fit, predict_proba, LogisticModel, ModelError};
use crate::report::{importance_csv, line_chart_svg, ChartSeries};
use crate::synth::{generate_with_rings, write_rings, SynthError};

pub const LEDGER_FILE: &str = "ledger.csv";
pub const RINGS_FILE: &str = "rings.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const PPR_SCORES_FILE: &str = "ppr_scores.csv";
pub const FEATURES_TRAIN_FILE: &str = "features_train.csv";
pub const FEATURES_TEST_FILE: &str = "features_test.csv";
pub const MODEL_FILE: &str = "model.json";
pub const MODEL_BASE_FILE: &str = "model_base.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const ROC_CSV_FILE: &str = "roc.csv";
pub const PR_CSV_FILE: &str = "pr.csv";
pub const PSI_FILE: &str = "psi.csv";
pub const IMPORTANCE_FILE: &str = "importance.csv";
pub const ROC_SVG_FILE: &str = "roc.svg";
pub const PR_SVG_FILE: &str = "pr.svg";
pub const MANIFEST_FILE: &str = "manifest.json";

/// The exposure feature column dropped for baseline models.
const PPR_COLUMN: &str = "ppr";
/// PSI below this is conventionally "stable".
const PSI_STABLE_THRESHOLD: f64 = 0.05;

/// Errors from any pipeline stage.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Exposure(#[from] ExposureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("missing intermediate file `{}` — run the `{produced_by}` stage first", file.display())]
    MissingIntermediate {
        file: PathBuf,
        produced_by: &'static str,
    },
    #[error("{}: {reason}", file.display())]
    BadArtifact { file: PathBuf, reason: String },
}

/// A [`PipelineError`] tagged with the stage that raised it.
#[derive(Debug, Error)]
#[error("stage `{stage}` failed: {source}")]
pub struct StageError {
    pub stage: &'static str,
    #[source]
    pub source: PipelineError,
}

fn tag(stage: &'static str) -> impl Fn(PipelineError) -> StageError {
    move |source| StageError { stage, source }
}

fn io_at(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Output-directory bookkeeping: writes files and maintains the hash
/// manifest. Keys are bare file names so the manifest is independent of
/// where the output directory lives.
struct Artifacts {
    dir: PathBuf,
    manifest: BTreeMap<String, String>,
}

impl Artifacts {
    fn open(dir: &Path) -> Result<Artifacts, PipelineError> {
        fs::create_dir_all(dir).map_err(io_at(dir))?;
        let manifest_path = dir.join(MANIFEST_FILE);
        let manifest = if manifest_path.exists() {
            let text = fs::read_to_string(&manifest_path).map_err(io_at(&manifest_path))?;
            serde_json::from_str(&text).map_err(|e| PipelineError::BadArtifact {
                file: manifest_path.clone(),
                reason: format!("manifest is not valid JSON: {e}"),
            })?
        } else {
            BTreeMap::new()
        };
        Ok(Artifacts {
            dir: dir.to_owned(),
            manifest,
        })
    }

    /// Writes one artifact and records its content hash.
    fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(io_at(&path))?;
        let digest = Sha256::digest(bytes);
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        self.manifest.insert(name.to_owned(), hex);
        Ok(())
    }

    /// Persists the manifest (sorted keys, stable bytes).
    fn save(&self) -> Result<(), PipelineError> {
        let path = self.dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("string map");
        text.push('\n');
        fs::write(&path, text).map_err(io_at(&path))?;
        Ok(())
    }
}

fn require_file(path: PathBuf, produced_by: &'static str) -> Result<PathBuf, PipelineError> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(PipelineError::MissingIntermediate {
            file: path,
            produced_by,
        })
    }
}

/// Where the ledger comes from: an explicit input path, or the synth
/// stage's output inside the artifact directory.
fn ledger_source(config: &PipelineConfig) -> Result<PathBuf, PipelineError> {
    match &config.ledger_path {
        Some(path) => require_file(path.clone(), "synth"),
        None => require_file(config.output_dir.join(LEDGER_FILE), "synth"),
    }
}

fn load_ledger(config: &PipelineConfig) -> Result<Vec<crate::ingest::Transaction>, PipelineError> {
    let path = ledger_source(config)?;
    let file = fs::File::open(&path).map_err(io_at(&path))?;
    Ok(parse_ledger(
        BufReader::new(file),
        &LedgerSchema::default(),
    )?)
}

/// Ledger → status filter → chronological split, the shared front end
/// of every downstream stage.
fn load_split(config: &PipelineConfig) -> Result<SplitDataset, PipelineError> {
    let ledger = load_ledger(config)?;
    let kept = filter_status(ledger, &config.status_filter);
    Ok(chronological_split(
        kept,
        config.history_days,
        config.train_fraction,
    )?)
}

/// The account graph visible at training time: history plus train rows,
/// never test rows.
fn training_graph(split: &SplitDataset) -> TransactionGraph {
    let mut rows = Vec::with_capacity(split.history.len() + split.train.len());
    rows.extend_from_slice(&split.history);
    rows.extend_from_slice(&split.train);
    build_graph(&rows)
}

/// Reads the cached exposure scores and aligns them to the graph.
fn load_scores(
    config: &PipelineConfig,
    graph: &TransactionGraph,
) -> Result<PprScores, PipelineError> {
    let path = require_file(config.output_dir.join(PPR_SCORES_FILE), "ppr")?;
    let file = fs::File::open(&path).map_err(io_at(&path))?;
    let map = read_scores(BufReader::new(file)).map_err(io_at(&path))?;
    scores_for_graph(&map, graph).map_err(|e| PipelineError::BadArtifact {
        file: path,
        reason: format!("scores do not cover the training graph: {e}"),
    })
}

fn load_features(path: PathBuf, produced_by: &'static str) -> Result<FeatureMatrix, PipelineError> {
    let path = require_file(path, produced_by)?;
    let file = fs::File::open(&path).map_err(io_at(&path))?;
    FeatureMatrix::read_csv(BufReader::new(file)).map_err(io_at(&path))
}

fn load_model(path: PathBuf, produced_by: &'static str) -> Result<LogisticModel, PipelineError> {
    let path = require_file(path, produced_by)?;
    let text = fs::read_to_string(&path).map_err(io_at(&path))?;
    LogisticModel::from_json(&text).map_err(|e| PipelineError::BadArtifact {
        file: path,
        reason: format!("model is not valid JSON: {e}"),
    })
}

/// Drops the exposure column, reporting a usable error when the matrix
/// was produced under a ppr-less mode.
fn baseline_matrix(matrix: &FeatureMatrix, file: &str) -> Result<FeatureMatrix, PipelineError> {
    matrix
        .without_column(PPR_COLUMN)
        .ok_or_else(|| PipelineError::BadArtifact {
            file: PathBuf::from(file),
            reason: format!(
                "no `{PPR_COLUMN}` column; re-run the `features` stage with run.mode=both"
            ),
        })
}

/// What `synth` produced.
#[derive(Debug, Clone, Copy)]
pub struct SynthOutcome {
    pub n_rows: usize,
    pub n_mules: usize,
}

/// Generates the synthetic ledger and ring roster.
///
/// # Errors
///
/// [`StageError`] wrapping the failing step.
pub fn stage_synth(config: &PipelineConfig) -> Result<SynthOutcome, StageError> {
    let tag = tag("synth");
    let mut artifacts = Artifacts::open(&config.output_dir).map_err(&tag)?;
    let (ledger, rings) = generate_with_rings(&config.synth).map_err(|e| tag(e.into()))?;

    let mut buf = Vec::new();
    write_ledger(&mut buf, &ledger, &LedgerSchema::default()).map_err(|e| tag(e.into()))?;
    artifacts.emit(LEDGER_FILE, &buf).map_err(&tag)?;

    let mut buf = Vec::new();
    write_rings(&mut buf, &rings)
        .map_err(|e| tag(io_at(&config.output_dir.join(RINGS_FILE))(e)))?;
    artifacts.emit(RINGS_FILE, &buf).map_err(&tag)?;

    artifacts.save().map_err(&tag)?;
    Ok(SynthOutcome {
        n_rows: ledger.len(),
        n_mules: rings.len(),
    })
}

/// Builds the training-time account graph and writes the edge list.
///
/// # Errors
///
/// [`StageError`] wrapping the failing step.
pub fn stage_graph(config: &PipelineConfig) -> Result<GraphStats, StageError> {
    let tag = tag("graph");
    let mut artifacts = Artifacts::open(&config.output_dir).map_err(&tag)?;
    let split = load_split(config).map_err(&tag)?;
    let graph = training_graph(&split);

    let mut buf = Vec::new();
    graph
        .write_edges(&mut buf)
        .map_err(|e| tag(io_at(&config.output_dir.join(EDGES_FILE))(e)))?;
    artifacts.emit(EDGES_FILE, &buf).map_err(&tag)?;
    artifacts.save().map_err(&tag)?;
    Ok(graph.stats())
}

/// What `ppr` produced.
#[derive(Debug, Clone, Copy)]
pub struct PprOutcome {
    pub n_accounts: usize,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Computes exposure scores over the training graph and caches them.
///
/// # Errors
///
/// [`StageError`] wrapping the failing step.
pub fn stage_ppr(config: &PipelineConfig) -> Result<PprOutcome, StageError> {
    let tag = tag("ppr");
    let mut artifacts = Artifacts::open(&config.output_dir).map_err(&tag)?;
    let split = load_split(config).map_err(&tag)?;
    let graph = training_graph(&split);

    let mut seed_rows = Vec::with_capacity(split.history.len() + split.train.len());
    seed_rows.extend_from_slice(&split.history);
    seed_rows.extend_from_slice(&split.train);
    let personalization = build_personalization(&seed_rows, &graph).map_err(|e| tag(e.into()))?;
    let scores = compute_ppr(&graph, &personalization, &config.ppr).map_err(|e| tag(e.into()))?;

    let mut buf = Vec::new();
    write_scores(&mut buf, &scores, &graph)
        .map_err(|e| tag(io_at(&config.output_dir.join(PPR_SCORES_FILE))(e)))?;
    artifacts.emit(PPR_SCORES_FILE, &buf).map_err(&tag)?;
    artifacts.save().map_err(&tag)?;
    Ok(PprOutcome {
        n_accounts: graph.n_nodes(),
        iterations_used: scores.iterations_used,
        converged: scores.converged,
    })
}

/// Assembles train/test feature matrices from the cached scores.
///
/// In baseline mode the exposure column is omitted entirely (and no
/// score cache is required); otherwise the matrices carry all seven
/// columns.
///
/// # Errors
///
/// [`StageError`] wrapping the failing step.
pub fn stage_features(config: &PipelineConfig) -> Result<(usize, usize), StageError> {
    let tag = tag("features");
    let mut artifacts = Artifacts::open(&config.output_dir).map_err(&tag)?;
    let split = load_split(config).map_err(&tag)?;
    let graph = training_graph(&split);
    let encoder = ChannelEncoder::fit(&split.train);
    let scores = match config.mode {
        RunMode::Baseline => PprScores::from_scores(vec![0.0; graph.n_nodes()]),
        RunMode::WithPpr | RunMode::Both => load_scores(config, &graph).map_err(&tag)?,
    };

    let (mut train_matrix, mut test_matrix) =
        assemble_features(&split, &scores, &graph, &encoder, &config.features);
    if config.mode == RunMode::Baseline {
        train_matrix = baseline_matrix(&train_matrix, FEATURES_TRAIN_FILE).map_err(&tag)?;
        test_matrix = baseline_matrix(&test_matrix, FEATURES_TEST_FILE).map_err(&tag)?;
    }

    for (name, matrix) in [
        (FEATURES_TRAIN_FILE, &train_matrix),
        (FEATURES_TEST_FILE, &test_matrix),
    ] {
        let mut buf = Vec::new();
        matrix
            .write_csv(&mut buf)
            .map_err(|e| tag(io_at(&config.output_dir.join(name))(e)))?;
        artifacts.emit(name, &buf).map_err(&tag)?;
    }
    artifacts.save().map_err(&tag)?;
    Ok((train_matrix.n_rows(), test_matrix.n_rows()))
}

fn emit_model(
    artifacts: &mut Artifacts,
    name: &str,
    model: &LogisticModel,
) -> Result<(), PipelineError> {
    let mut text = model.to_json();
    text.push('\n');
    artifacts.emit(name, text.as_bytes())
}

/// Fits the configured model(s) on the cached training matrix.
///
/// # Errors
///
/// [`StageError`] wrapping the failing step.
pub fn stage_train(config: &PipelineConfig) -> Result<(), StageError> {
    let tag = tag("train");
    let mut artifacts = Artifacts::open(&config.output_dir).map_err(&tag)?;
    let train_matrix =
        load_features(config.output_dir.join(FEATURES_TRAIN_FILE), "features").map_err(&tag)?;

    match config.mode {
        RunMode::Baseline | RunMode::WithPpr => {
            let model = fit(&train_matrix, &config.train).map_err(|e| tag(e.into()))?;
            emit_model(&mut artifacts, MODEL_FILE, &model).map_err(&tag)?;
        }
        RunMode::Both => {
            let with_ppr = fit(&train_matrix, &config.train).map_err(|e| tag(e.into()))?;
            let base_matrix = baseline_matrix(&train_matrix, FEATURES_TRAIN_FILE).map_err(&tag)?;
            let base = fit(&base_matrix, &config.train).map_err(|e| tag(e.into()))?;
            emit_model(&mut artifacts, MODEL_FILE, &with_ppr).map_err(&tag)?;
            emit_model(&mut artifacts, MODEL_BASE_FILE, &base).map_err(&tag)?;
        }
    }
    artifacts.save().map_err(&tag)?;
    Ok(())
}

/// The ΔAUC comparison block emitted in `both` mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub auc_base: f64,
    pub auc_ppr: f64,
    pub delta: f64,
}

/// Everything `metrics.json` holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    /// Which run mode produced this document.
    pub mode: String,
    /// Metrics of the mode's main model (the exposure model when ppr is
    /// in play, the baseline otherwise).
    pub primary: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub baseline: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub comparison: Option<Comparison>,
}

fn matrix_scores(
    model: &LogisticModel,
    matrix: &FeatureMatrix,
    file: &str,
) -> Result<Vec<f64>, PipelineError> {
    if model.feature_names != matrix.columns {
        return Err(PipelineError::BadArtifact {
            file: PathBuf::from(file),
            reason: format!(
                "feature columns {:?} do not match the model's {:?}",
                matrix.columns, model.feature_names
            ),
        });
    }
    Ok(predict_proba(model, &matrix.rows)?)
}

/// Scores the cached test matrix and writes metrics plus curve tables.
///
/// # Errors
///
/// [`StageError`] wrapping the failing step.
pub fn stage_evaluate(config: &PipelineConfig) -> Result<MetricsDocument, StageError> {
    let tag = tag("evaluate");
    let mut artifacts = Artifacts::open(&config.output_dir).map_err(&tag)?;
    let test_matrix =
        load_features(config.output_dir.join(FEATURES_TEST_FILE), "features").map_err(&tag)?;
    let model = load_model(config.output_dir.join(MODEL_FILE), "train").map_err(&tag)?;
    let scores = matrix_scores(&model, &test_matrix, FEATURES_TEST_FILE).map_err(&tag)?;
    let primary = evaluate_scores(&scores, &test_matrix.labels).map_err(|e| tag(e.into()))?;

    let document = match config.mode {
        RunMode::Baseline | RunMode::WithPpr => MetricsDocument {
            mode: config.mode.as_str().to_owned(),
            primary,
            baseline: None,
            comparison: None,
        },
        RunMode::Both => {
            let base_model =
                load_model(config.output_dir.join(MODEL_BASE_FILE), "train").map_err(&tag)?;
            let base_matrix = baseline_matrix(&test_matrix, FEATURES_TEST_FILE).map_err(&tag)?;
            let base_scores =
                matrix_scores(&base_model, &base_matrix, FEATURES_TEST_FILE).map_err(&tag)?;
            let baseline =
                evaluate_scores(&base_scores, &base_matrix.labels).map_err(|e| tag(e.into()))?;
            let comparison = Comparison {
                auc_base: baseline.auc,
                auc_ppr: primary.auc,
                delta: primary.auc - baseline.auc,
            };
            MetricsDocument {
                mode: config.mode.as_str().to_owned(),
                primary,
                baseline: Some(baseline),
                comparison: Some(comparison),
            }
        }
    };

    let mut text = serde_json::to_string_pretty(&document).expect("metrics serialize");
    text.push('\n');
    artifacts
        .emit(METRICS_FILE, text.as_bytes())
        .map_err(&tag)?;

    let mut roc = String::from("fpr,tpr\n");
    for (fpr, tpr) in &document.primary.roc_points {
        roc.push_str(&format!("{fpr},{tpr}\n"));
    }
    artifacts.emit(ROC_CSV_FILE, roc.as_bytes()).map_err(&tag)?;

    let mut pr = String::from("recall,precision\n");
    for (recall, precision) in &document.primary.pr_points {
        pr.push_str(&format!("{recall},{precision}\n"));
    }
    artifacts.emit(PR_CSV_FILE, pr.as_bytes()).map_err(&tag)?;

    artifacts.save().map_err(&tag)?;
    Ok(document)
}

/// Per-feature stability of train vs test distributions.
///
/// # Errors
///
/// [`StageError`] wrapping the failing step.
pub fn stage_psi(config: &PipelineConfig) -> Result<Vec<(String, PsiEntry)>, StageError> {
    let tag = tag("psi");
    let mut artifacts = Artifacts::open(&config.output_dir).map_err(&tag)?;
    let train_matrix =
        load_features(config.output_dir.join(FEATURES_TRAIN_FILE), "features").map_err(&tag)?;
    let test_matrix =
        load_features(config.output_dir.join(FEATURES_TEST_FILE), "features").map_err(&tag)?;

    let mut entries = Vec::new();
    let mut csv = String::from("feature,psi,flag\n");
    for name in &train_matrix.columns {
        let train_col = train_matrix.column(name).expect("own column");
        let test_col = test_matrix.column(name).ok_or_else(|| {
            tag(PipelineError::BadArtifact {
                file: PathBuf::from(FEATURES_TEST_FILE),
                reason: format!("missing column `{name}` present in the train matrix"),
            })
        })?;
        let entry = psi(&train_col, &test_col, config.psi_bins).map_err(|e| tag(e.into()))?;
        let flag = if entry.degenerate {
            "degenerate"
        } else if entry.psi < PSI_STABLE_THRESHOLD {
            "stable"
        } else {
            "shifted"
        };
        csv.push_str(&format!("{name},{},{flag}\n", entry.psi));
        entries.push((name.clone(), entry));
    }
    artifacts.emit(PSI_FILE, csv.as_bytes()).map_err(&tag)?;
    artifacts.save().map_err(&tag)?;
    Ok(entries)
}

/// Renders the importance table and the ROC/PR plots from cached
/// model and metrics artifacts.
///
/// # Errors
///
/// [`StageError`] wrapping the failing step.
pub fn stage_report(config: &PipelineConfig) -> Result<(), StageError> {
    let tag = tag("report");
    let mut artifacts = Artifacts::open(&config.output_dir).map_err(&tag)?;
    let model = load_model(config.output_dir.join(MODEL_FILE), "train").map_err(&tag)?;
    let metrics_path =
        require_file(config.output_dir.join(METRICS_FILE), "evaluate").map_err(&tag)?;
    let text = fs::read_to_string(&metrics_path).map_err(|e| tag(io_at(&metrics_path)(e)))?;
    let document: MetricsDocument = serde_json::from_str(&text).map_err(|e| {
        tag(PipelineError::BadArtifact {
            file: metrics_path.clone(),
            reason: format!("metrics are not valid JSON: {e}"),
        })
    })?;

    let importance = importance_csv(&feature_importance(&model));
    artifacts
        .emit(IMPORTANCE_FILE, importance.as_bytes())
        .map_err(&tag)?;

    let mut roc_series = Vec::new();
    if let Some(baseline) = &document.baseline {
        roc_series.push(ChartSeries {
            label: "baseline",
            color: "#9aa0a6",
            points: &baseline.roc_points,
        });
    }
    roc_series.push(ChartSeries {
        label: match document.mode.as_str() {
            "baseline" => "baseline",
            _ => "with ppr",
        },
        color: "#1a73e8",
        points: &document.primary.roc_points,
    });
    let roc_svg = line_chart_svg(
        "ROC curve",
        "false positive rate",
        "true positive rate",
        &roc_series,
        true,
    );
    artifacts
        .emit(ROC_SVG_FILE, roc_svg.as_bytes())
        .map_err(&tag)?;

    let mut pr_series = Vec::new();
    if let Some(baseline) = &document.baseline {
        pr_series.push(ChartSeries {
            label: "baseline",
            color: "#9aa0a6",
            points: &baseline.pr_points,
        });
    }
    pr_series.push(ChartSeries {
        label: match document.mode.as_str() {
            "baseline" => "baseline",
            _ => "with ppr",
        },
        color: "#1a73e8",
        points: &document.primary.pr_points,
    });
    let pr_svg = line_chart_svg(
        "Precision-recall curve",
        "recall",
        "precision",
        &pr_series,
        false,
    );
    artifacts
        .emit(PR_SVG_FILE, pr_svg.as_bytes())
        .map_err(&tag)?;

    artifacts.save().map_err(&tag)?;
    Ok(())
}

/// Runs every stage in order. With an explicit input ledger the synth
/// stage is skipped; in baseline mode the exposure stage is skipped.
///
/// # Errors
///
/// The first failing stage's [`StageError`].
pub fn run_pipeline(config: &PipelineConfig) -> Result<MetricsDocument, StageError> {
    if config.ledger_path.is_none() {
        stage_synth(config)?;
    }
    stage_graph(config)?;
    if config.mode != RunMode::Baseline {
        stage_ppr(config)?;
    }
    stage_features(config)?;
    stage_train(config)?;
    let document = stage_evaluate(config)?;
    stage_psi(config)?;
    stage_report(config)?;
    Ok(document)
}
