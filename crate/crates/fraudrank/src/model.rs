//! Logistic regression on standardized features.
//!
//! Features are standardized with training-set statistics before any
//! optimization so the learned coefficients live on one scale and their
//! absolute values can be compared directly for importance ranking.
//! Training minimizes L2-regularized mean log-loss by full-batch gradient
//! descent: deterministic, and at the row counts this pipeline handles,
//! fast enough that stochastic methods would buy nothing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureMatrix;

/// Errors raised while scaling, training, or predicting.
#[derive(Debug, Error)]
pub enum ModelError {
    /// No rows (or no columns) to work with.
    #[error("feature matrix is empty")]
    EmptyMatrix,
    /// Matrix width does not match what the model was trained on.
    #[error("dimension mismatch: model has {expected} features, matrix has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Label vector length does not match the row count.
    #[error("row count mismatch: {rows} feature rows but {labels} labels")]
    RowCountMismatch { rows: usize, labels: usize },
}

/// Per-feature standardization statistics from the training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerStats {
    pub means: Vec<f64>,
    /// Population standard deviations; entries below 1e-12 are replaced
    /// by 1 so constant features standardize to zero instead of NaN.
    pub stds: Vec<f64>,
}

/// How training weighs the two classes in the loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    /// All rows weigh 1 (default).
    #[default]
    None,
    /// Each class contributes equally: rows weigh `n / (2 * n_class)`.
    Balanced,
}

/// Gradient-descent hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub learning_rate: f64,
    /// L2 penalty on the weights; the intercept is never regularized.
    pub l2_lambda: f64,
    pub max_epochs: usize,
    /// Relative loss-change threshold that stops training.
    pub loss_tol: f64,
    pub class_weighting: ClassWeighting,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            learning_rate: 0.1,
            l2_lambda: 1e-6,
            max_epochs: 500,
            loss_tol: 1e-10,
            class_weighting: ClassWeighting::None,
        }
    }
}

/// A trained binary logistic regression model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub feature_names: Vec<String>,
    /// Coefficients in standardized feature space.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub scaler: ScalerStats,
    pub train_params: TrainParams,
    /// Set when training saw a single class and fell back to an
    /// intercept-only model.
    pub single_class: bool,
    /// Final training loss (mean log-loss plus L2 term).
    pub final_loss: f64,
    pub epochs_run: usize,
}

/// Numerically stable sigmoid clamped into the open interval (0, 1).
///
/// For any finite logit the result is strictly positive and strictly
/// below 1 (at logit +40 it is `1 - 2^-53`, comfortably above
/// `1 - 1e-15`), so downstream log-loss terms never hit `ln(0)`.
pub fn sigmoid(logit: f64) -> f64 {
    let p = if logit >= 0.0 {
        1.0 / (1.0 + (-logit).exp())
    } else {
        let e = logit.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// `ln(1 + e^t)` without overflow for large |t|.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Computes training statistics over the rows (population std).
///
/// # Errors
///
/// [`ModelError::EmptyMatrix`] when there are no rows or no columns.
pub fn fit_scaler(rows: &[Vec<f64>]) -> Result<ScalerStats, ModelError> {
    let n = rows.len();
    if n == 0 || rows[0].is_empty() {
        return Err(ModelError::EmptyMatrix);
    }
    let d = rows[0].len();
    let mut means = vec![0.0f64; d];
    for row in rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= n as f64;
    }
    let mut variances = vec![0.0f64; d];
    for row in rows {
        for ((var, v), m) in variances.iter_mut().zip(row).zip(&means) {
            let centered = v - m;
            *var += centered * centered;
        }
    }
    let stds = variances
        .into_iter()
        .map(|var| {
            let std = (var / n as f64).sqrt();
            if std < 1e-12 {
                1.0
            } else {
                std
            }
        })
        .collect();
    Ok(ScalerStats { means, stds })
}

/// Standardizes rows with training statistics: `(x - mean) / std`.
///
/// # Errors
///
/// [`ModelError::DimensionMismatch`] when a row's width differs from the
/// statistics.
pub fn apply_scaler(rows: &[Vec<f64>], stats: &ScalerStats) -> Result<Vec<Vec<f64>>, ModelError> {
    rows.iter()
        .map(|row| {
            if row.len() != stats.means.len() {
                return Err(ModelError::DimensionMismatch {
                    expected: stats.means.len(),
                    got: row.len(),
                });
            }
            Ok(row
                .iter()
                .zip(&stats.means)
                .zip(&stats.stds)
                .map(|((v, m), s)| (v - m) / s)
                .collect())
        })
        .collect()
}

/// Per-row class weights under a weighting scheme. With `Balanced`, each
/// class contributes half the total weight; weights always sum to `n`.
fn class_weights(labels: &[u8], weighting: ClassWeighting) -> (f64, f64) {
    match weighting {
        ClassWeighting::None => (1.0, 1.0),
        ClassWeighting::Balanced => {
            let n = labels.len() as f64;
            let n_pos = labels.iter().filter(|l| **l == 1).count() as f64;
            let n_neg = n - n_pos;
            // Single-class data never reaches the weighted loss (training
            // short-circuits to intercept-only), but guard anyway.
            let w_pos = if n_pos > 0.0 { n / (2.0 * n_pos) } else { 1.0 };
            let w_neg = if n_neg > 0.0 { n / (2.0 * n_neg) } else { 1.0 };
            (w_pos, w_neg)
        }
    }
}

/// Weighted mean log-loss plus `(lambda/2)·||w||²` on standardized rows.
///
/// Exposed so tests can difference it numerically against
/// [`logistic_gradient`].
pub fn logistic_loss(
    rows: &[Vec<f64>],
    labels: &[u8],
    weights: &[f64],
    intercept: f64,
    l2_lambda: f64,
    class_weighting: ClassWeighting,
) -> f64 {
    let n = rows.len() as f64;
    let (w_pos, w_neg) = class_weights(labels, class_weighting);
    let mut total = 0.0f64;
    for (row, &label) in rows.iter().zip(labels) {
        let logit: f64 = row.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() + intercept;
        // y=1: ln(1 + e^{-z});  y=0: ln(1 + e^{z}) — both via softplus.
        let row_loss = if label == 1 {
            softplus(-logit)
        } else {
            softplus(logit)
        };
        total += row_loss * if label == 1 { w_pos } else { w_neg };
    }
    let penalty: f64 = weights.iter().map(|w| w * w).sum::<f64>() * l2_lambda / 2.0;
    total / n + penalty
}

/// Analytic gradient of [`logistic_loss`]: returns `(d/dw, d/db)`.
pub fn logistic_gradient(
    rows: &[Vec<f64>],
    labels: &[u8],
    weights: &[f64],
    intercept: f64,
    l2_lambda: f64,
    class_weighting: ClassWeighting,
) -> (Vec<f64>, f64) {
    let n = rows.len() as f64;
    let (w_pos, w_neg) = class_weights(labels, class_weighting);
    let mut grad_w = vec![0.0f64; weights.len()];
    let mut grad_b = 0.0f64;
    for (row, &label) in rows.iter().zip(labels) {
        let logit: f64 = row.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() + intercept;
        let residual = (sigmoid(logit) - f64::from(label)) * if label == 1 { w_pos } else { w_neg };
        for (g, x) in grad_w.iter_mut().zip(row) {
            *g += residual * x;
        }
        grad_b += residual;
    }
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2_lambda * w;
    }
    (grad_w, grad_b / n)
}

/// Trains on already-standardized rows.
///
/// Full-batch gradient descent from zero weights; when a step would
/// increase the loss, the step size is halved (backtracking) until the
/// loss does not increase. Training stops at `max_epochs`, when the
/// relative loss improvement drops below `loss_tol`, or when no step of
/// any size improves the loss.
///
/// Single-class label vectors yield an intercept-only model (weights all
/// zero, intercept at the smoothed base-rate logit) flagged with
/// `single_class = true`.
///
/// Feature names default to `f1..fk`; [`fit`] attaches real column names.
///
/// # Errors
///
/// [`ModelError::EmptyMatrix`] and [`ModelError::RowCountMismatch`].
pub fn train(
    rows: &[Vec<f64>],
    labels: &[u8],
    params: &TrainParams,
) -> Result<LogisticModel, ModelError> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(ModelError::EmptyMatrix);
    }
    if rows.len() != labels.len() {
        return Err(ModelError::RowCountMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    let d = rows[0].len();
    let feature_names: Vec<String> = (1..=d).map(|i| format!("f{i}")).collect();
    let identity_scaler = ScalerStats {
        means: vec![0.0; d],
        stds: vec![1.0; d],
    };

    let n_pos = labels.iter().filter(|l| **l == 1).count();
    if n_pos == 0 || n_pos == labels.len() {
        // Degenerate single-class data: the MLE intercept diverges, so use
        // the Laplace-smoothed base rate, which stays finite and keeps
        // predictions on the correct side of 0.5.
        let rate = (n_pos as f64 + 0.5) / (labels.len() as f64 + 1.0);
        let intercept = (rate / (1.0 - rate)).ln();
        let weights = vec![0.0; d];
        let final_loss = logistic_loss(
            rows,
            labels,
            &weights,
            intercept,
            params.l2_lambda,
            params.class_weighting,
        );
        return Ok(LogisticModel {
            feature_names,
            weights,
            intercept,
            scaler: identity_scaler,
            train_params: *params,
            single_class: true,
            final_loss,
            epochs_run: 0,
        });
    }

    let mut weights = vec![0.0f64; d];
    let mut intercept = 0.0f64;
    let mut current_loss = logistic_loss(
        rows,
        labels,
        &weights,
        intercept,
        params.l2_lambda,
        params.class_weighting,
    );
    let mut epochs_run = 0usize;
    for _ in 0..params.max_epochs {
        let (grad_w, grad_b) = logistic_gradient(
            rows,
            labels,
            &weights,
            intercept,
            params.l2_lambda,
            params.class_weighting,
        );
        let mut step = params.learning_rate;
        let (next_weights, next_intercept, next_loss) = loop {
            let candidate_weights: Vec<f64> = weights
                .iter()
                .zip(&grad_w)
                .map(|(w, g)| w - step * g)
                .collect();
            let candidate_intercept = intercept - step * grad_b;
            let candidate_loss = logistic_loss(
                rows,
                labels,
                &candidate_weights,
                candidate_intercept,
                params.l2_lambda,
                params.class_weighting,
            );
            if candidate_loss <= current_loss || step < 1e-18 {
                break (candidate_weights, candidate_intercept, candidate_loss);
            }
            step /= 2.0;
        };
        if next_loss > current_loss {
            // Even a vanishing step increases the loss: we are at (or
            // below float resolution of) a minimum.
            break;
        }
        let improvement = current_loss - next_loss;
        weights = next_weights;
        intercept = next_intercept;
        current_loss = next_loss;
        epochs_run += 1;
        if improvement / current_loss.max(f64::MIN_POSITIVE) < params.loss_tol {
            break;
        }
    }

    Ok(LogisticModel {
        feature_names,
        weights,
        intercept,
        scaler: identity_scaler,
        train_params: *params,
        single_class: false,
        final_loss: current_loss,
        epochs_run,
    })
}

/// Fits scaler and model on a named feature matrix in one step.
///
/// # Errors
///
/// Propagates scaler and training errors.
pub fn fit(matrix: &FeatureMatrix, params: &TrainParams) -> Result<LogisticModel, ModelError> {
    let stats = fit_scaler(&matrix.rows)?;
    let standardized = apply_scaler(&matrix.rows, &stats)?;
    let mut model = train(&standardized, &matrix.labels, params)?;
    model.feature_names = matrix.columns.clone();
    model.scaler = stats;
    Ok(model)
}

/// Probability predictions on raw (unstandardized) rows: the model's own
/// scaler is applied first.
///
/// # Errors
///
/// [`ModelError::DimensionMismatch`] when row width differs from the
/// model's feature count.
pub fn predict_proba(model: &LogisticModel, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
    let standardized = apply_scaler(rows, &model.scaler)?;
    Ok(standardized
        .iter()
        .map(|row| {
            let logit: f64 = row
                .iter()
                .zip(&model.weights)
                .map(|(x, w)| x * w)
                .sum::<f64>()
                + model.intercept;
            sigmoid(logit)
        })
        .collect())
}

/// Features ranked by descending absolute coefficient; ties broken by
/// name. The intercept is excluded.
pub fn feature_importance(model: &LogisticModel) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = model
        .feature_names
        .iter()
        .cloned()
        .zip(model.weights.iter().map(|w| w.abs()))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("importances are never NaN")
            .then_with(|| a.0.cmp(&b.0))
    });
    ranked
}

impl LogisticModel {
    /// Serializes the model as pretty JSON (deterministic field order).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    /// Parses a model previously written by [`LogisticModel::to_json`].
    pub fn from_json(text: &str) -> Result<LogisticModel, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn scaler_hand_case_and_constant_guard() {
        // Column 0: {0, 2} -> mean 1, population std 1 -> {-1, 1}.
        // Column 1: constant -> std guard kicks in -> zeros.
        let rows = vec![vec![0.0, 5.0], vec![2.0, 5.0]];
        let stats = fit_scaler(&rows).unwrap();
        assert_eq!(stats.means, vec![1.0, 5.0]);
        assert_eq!(stats.stds, vec![1.0, 1.0]);
        let scaled = apply_scaler(&rows, &stats).unwrap();
        assert_eq!(scaled, vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn standardized_training_columns_have_zero_mean_unit_std() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..4).map(|_| rng.random_range(-10.0..10.0)).collect())
            .collect();
        let stats = fit_scaler(&rows).unwrap();
        let scaled = apply_scaler(&rows, &stats).unwrap();
        for col in 0..4 {
            let mean: f64 = scaled.iter().map(|r| r[col]).sum::<f64>() / 50.0;
            let var: f64 = scaled.iter().map(|r| r[col] * r[col]).sum::<f64>() / 50.0;
            assert!(close(mean, 0.0, 1e-9), "column {col} mean {mean}");
            assert!(close(var, 1.0, 1e-9), "column {col} var {var}");
        }
    }

    #[test]
    fn empty_matrix_is_rejected() {
        assert!(matches!(fit_scaler(&[]), Err(ModelError::EmptyMatrix)));
        assert!(matches!(
            train(&[], &[], &TrainParams::default()),
            Err(ModelError::EmptyMatrix)
        ));
    }

    #[test]
    fn row_count_mismatch_is_rejected() {
        let rows = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            train(&rows, &[1], &TrainParams::default()),
            Err(ModelError::RowCountMismatch { rows: 2, labels: 1 })
        ));
    }

    #[test]
    fn separable_two_point_set_trains_to_near_zero_loss() {
        let rows = vec![vec![-1.0], vec![1.0]];
        let labels = vec![0, 1];
        let params = TrainParams {
            max_epochs: 5000,
            l2_lambda: 0.0,
            ..TrainParams::default()
        };
        let model = train(&rows, &labels, &params).unwrap();
        assert!(!model.single_class);
        assert!(model.final_loss < 0.01, "loss {}", model.final_loss);
        let probs = predict_proba(&model, &rows).unwrap();
        assert!(probs[0] < 0.5 && probs[1] > 0.5);
    }

    #[test]
    fn all_zero_labels_give_intercept_only_model() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        let labels = vec![0, 0, 0];
        let model = train(&rows, &labels, &TrainParams::default()).unwrap();
        assert!(model.single_class);
        assert!(model.weights.iter().all(|w| *w == 0.0));
        let probs = predict_proba(&model, &rows).unwrap();
        assert!(probs.iter().all(|p| *p < 0.5), "probs {probs:?}");
        // Mirror case: all ones predicts > 0.5 everywhere.
        let model = train(&rows, &[1, 1, 1], &TrainParams::default()).unwrap();
        assert!(model.single_class);
        let probs = predict_proba(&model, &rows).unwrap();
        assert!(probs.iter().all(|p| *p > 0.5));
    }

    #[test]
    fn zero_model_predicts_one_half() {
        let model = LogisticModel {
            feature_names: vec!["f1".into()],
            weights: vec![0.0],
            intercept: 0.0,
            scaler: ScalerStats {
                means: vec![0.0],
                stds: vec![1.0],
            },
            train_params: TrainParams::default(),
            single_class: false,
            final_loss: 0.0,
            epochs_run: 0,
        };
        let probs = predict_proba(&model, &[vec![3.7], vec![-123.0]]).unwrap();
        assert_eq!(probs, vec![0.5, 0.5]);
    }

    #[test]
    fn extreme_logits_stay_inside_the_open_interval() {
        assert!(sigmoid(40.0) >= 1.0 - 1e-15);
        assert!(sigmoid(40.0) < 1.0);
        assert!(sigmoid(700.0) < 1.0);
        assert!(sigmoid(-700.0) > 0.0);
        assert!(sigmoid(-40.0) > 0.0);
        // Log-loss stays finite at the clamp boundary.
        assert!(sigmoid(700.0).ln().is_finite());
        assert!((-sigmoid(-700.0)).ln_1p().is_finite());
    }

    #[test]
    fn prediction_is_monotone_in_positive_weight_features() {
        let rows = vec![vec![-2.0], vec![-1.0], vec![0.5], vec![2.0]];
        let labels = vec![0, 0, 1, 1];
        let model = train(&rows, &labels, &TrainParams::default()).unwrap();
        assert!(model.weights[0] > 0.0);
        let inputs: Vec<Vec<f64>> = (-10..=10).map(|i| vec![f64::from(i) * 0.5]).collect();
        let probs = predict_proba(&model, &inputs).unwrap();
        for pair in probs.windows(2) {
            assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn dimension_mismatch_in_prediction_is_rejected() {
        let rows = vec![vec![-1.0, 0.0], vec![1.0, 0.0]];
        let model = train(&rows, &[0, 1], &TrainParams::default()).unwrap();
        assert!(matches!(
            predict_proba(&model, &[vec![1.0]]),
            Err(ModelError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn gradient_matches_finite_differences_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let h = 1e-6;
        for _ in 0..5 {
            let rows: Vec<Vec<f64>> = (0..10)
                .map(|_| (0..7).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let labels: Vec<u8> = (0..10).map(|_| u8::from(rng.random_bool(0.5))).collect();
            let weights: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
            let intercept: f64 = rng.random_range(-1.0..1.0);
            let lambda = 0.01;

            let (grad_w, grad_b) = logistic_gradient(
                &rows,
                &labels,
                &weights,
                intercept,
                lambda,
                ClassWeighting::None,
            );
            let loss_at = |w: &[f64], b: f64| {
                logistic_loss(&rows, &labels, w, b, lambda, ClassWeighting::None)
            };
            for k in 0..7 {
                let mut plus = weights.clone();
                plus[k] += h;
                let mut minus = weights.clone();
                minus[k] -= h;
                let numeric = (loss_at(&plus, intercept) - loss_at(&minus, intercept)) / (2.0 * h);
                let denom = grad_w[k].abs().max(numeric.abs()).max(1.0);
                assert!(
                    (grad_w[k] - numeric).abs() / denom < 1e-6,
                    "weight {k}: analytic {} vs numeric {numeric}",
                    grad_w[k]
                );
            }
            let numeric_b =
                (loss_at(&weights, intercept + h) - loss_at(&weights, intercept - h)) / (2.0 * h);
            let denom = grad_b.abs().max(numeric_b.abs()).max(1.0);
            assert!((grad_b - numeric_b).abs() / denom < 1e-6);
        }
    }

    #[test]
    fn balanced_weighting_shifts_the_decision_toward_the_minority() {
        // 1 positive among 20: unweighted training stays pessimistic,
        // balanced training pushes the positive row's probability up.
        let mut rows: Vec<Vec<f64>> = (0..19).map(|i| vec![f64::from(i % 5) - 2.0]).collect();
        rows.push(vec![2.5]);
        let mut labels = vec![0u8; 19];
        labels.push(1);
        let base = train(&rows, &labels, &TrainParams::default()).unwrap();
        let balanced = train(
            &rows,
            &labels,
            &TrainParams {
                class_weighting: ClassWeighting::Balanced,
                ..TrainParams::default()
            },
        )
        .unwrap();
        let p_base = predict_proba(&base, &[vec![2.5]]).unwrap()[0];
        let p_balanced = predict_proba(&balanced, &[vec![2.5]]).unwrap()[0];
        assert!(p_balanced > p_base);
    }

    #[test]
    fn importance_sorts_by_absolute_value_then_name() {
        let model = LogisticModel {
            feature_names: vec!["f1".into(), "f2".into(), "f3".into()],
            weights: vec![0.8, -0.7, 0.01],
            intercept: 0.3,
            scaler: ScalerStats {
                means: vec![0.0; 3],
                stds: vec![1.0; 3],
            },
            train_params: TrainParams::default(),
            single_class: false,
            final_loss: 0.0,
            epochs_run: 0,
        };
        let ranked = feature_importance(&model);
        let names: Vec<&str> = ranked.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["f1", "f2", "f3"]);
        assert_eq!(ranked[1].1, 0.7);

        // Sign invariance: negating a coefficient changes nothing.
        let mut negated = model.clone();
        negated.weights[0] = -0.8;
        assert_eq!(feature_importance(&negated), ranked);

        // Ties break by name.
        let mut tied = model;
        tied.weights = vec![0.5, -0.5, 0.5];
        let tied_names: Vec<String> = feature_importance(&tied)
            .into_iter()
            .map(|(n, _)| n)
            .collect();
        assert_eq!(tied_names, ["f1", "f2", "f3"]);
    }

    #[test]
    fn perfectly_separating_feature_wins_importance() {
        // Feature 1 separates the classes; feature 2 is noise.
        let rows = vec![
            vec![-1.2, 0.3],
            vec![-0.8, -0.4],
            vec![-1.0, 0.9],
            vec![1.1, 0.2],
            vec![0.9, -0.6],
            vec![1.0, 0.5],
        ];
        let labels = vec![0, 0, 0, 1, 1, 1];
        let params = TrainParams {
            l2_lambda: 0.0,
            max_epochs: 2000,
            ..TrainParams::default()
        };
        let model = train(&rows, &labels, &params).unwrap();
        let ranked = feature_importance(&model);
        assert_eq!(ranked[0].0, "f1");
    }

    #[test]
    fn model_json_round_trips() {
        let rows = vec![vec![-1.0, 2.0], vec![1.0, 0.5], vec![0.3, -1.0]];
        let labels = vec![0, 1, 1];
        let model = train(&rows, &labels, &TrainParams::default()).unwrap();
        let parsed = LogisticModel::from_json(&model.to_json()).unwrap();
        assert_eq!(parsed, model);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn training_loss_never_increases(
            seed in 0u64..500,
            n in 4usize..30,
            d in 1usize..5,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect())
                .collect();
            let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.4))).collect();
            let params = TrainParams { max_epochs: 40, ..TrainParams::default() };
            let model = train(&rows, &labels, &params).unwrap();
            // Re-walk the loss trajectory epoch by epoch: each prefix run
            // must end at a loss no larger than the shorter prefix.
            let mut previous = f64::INFINITY;
            for epochs in [1usize, 5, 10, 20, 40] {
                let m = train(
                    &rows,
                    &labels,
                    &TrainParams { max_epochs: epochs, ..params },
                ).unwrap();
                prop_assert!(m.final_loss <= previous + 1e-12);
                previous = m.final_loss;
            }
            prop_assert!(model.final_loss.is_finite());
        }

        #[test]
        fn importance_is_permutation_equivariant(
            weights in prop::collection::vec(-2.0f64..2.0, 3..6),
        ) {
            let d = weights.len();
            let names: Vec<String> = (1..=d).map(|i| format!("f{i}")).collect();
            let base = LogisticModel {
                feature_names: names.clone(),
                weights: weights.clone(),
                intercept: 0.0,
                scaler: ScalerStats { means: vec![0.0; d], stds: vec![1.0; d] },
                train_params: TrainParams::default(),
                single_class: false,
                final_loss: 0.0,
                epochs_run: 0,
            };
            // Reverse the feature order; the ranked output (name, value)
            // pairs must be identical.
            let reversed = LogisticModel {
                feature_names: names.into_iter().rev().collect(),
                weights: weights.into_iter().rev().collect(),
                ..base.clone()
            };
            prop_assert_eq!(feature_importance(&base), feature_importance(&reversed));
        }
    }
}
