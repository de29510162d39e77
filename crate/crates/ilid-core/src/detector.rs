//! The online pipeline: subsample, forecast each variant, score consistency,
//! compare to the calibrated threshold.
//!
//! Scoring one window is pure, so fixed-threshold batches parallelize across
//! windows (rayon under the `parallel` feature). Dynamic-threshold batches are
//! processed strictly in input order by a single updater: each verdict uses
//! the threshold as of its arrival, and only afterwards may its similarity
//! enter the buffer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{CalibrationError, ThresholdModel};
use crate::forecaster::{forecast, ForecastError, ForecasterSpec};
use crate::series::SampleWindow;
use crate::similarity::{
    aggregate, pairwise_scores_lenient, Metric, PairwiseScores, SimilarityError,
};
use crate::subsample::{apply_plan, PlanError, SubsamplePlan};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("forecasting subsample variant {variant} failed: {source}")]
    VariantForecast {
        variant: usize,
        source: ForecastError,
    },
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error("subsample length {len} is below the forecaster minimum context {min_context}")]
    SubsampleBelowMinContext { len: usize, min_context: usize },
    #[error("sub-horizon must be at least 2 for the pearson metric, got {0}")]
    SubHorizonTooShort(usize),
    #[error("prediction and truth lengths differ: {pred} vs {truth}")]
    MetricsLengthMismatch { pred: usize, truth: usize },
    #[error("r2 undefined: truth is constant or has fewer than 2 values")]
    ConstantTruth,
    #[error("evaluation requires a non-empty {0} population")]
    EmptyPopulation(&'static str),
}

/// Everything needed to score a window, bundled so batch entry points stay
/// readable. `subset = None` averages all pairwise scores.
#[derive(Debug, Clone)]
pub struct ScoringPipeline<'a> {
    pub spec: &'a ForecasterSpec,
    pub plan: &'a SubsamplePlan,
    pub metric: Metric,
    pub subset: Option<&'a [usize]>,
    pub sub_horizon: usize,
}

impl<'a> ScoringPipeline<'a> {
    pub fn new(
        spec: &'a ForecasterSpec,
        plan: &'a SubsamplePlan,
        metric: Metric,
        sub_horizon: usize,
    ) -> Self {
        Self {
            spec,
            plan,
            metric,
            subset: None,
            sub_horizon,
        }
    }

    pub fn with_subset(mut self, subset: &'a [usize]) -> Self {
        self.subset = Some(subset);
        self
    }
}

/// Consistency score of one window plus the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScore {
    pub score: f64,
    pub pair_scores: PairwiseScores,
    /// Pairs whose Pearson correlation was undefined and scored 0.0; a
    /// collapsed constant forecast is anomalous in itself, so the event is
    /// kept on the record rather than aborting the window.
    pub degenerate_pairs: Vec<(usize, usize)>,
}

/// Subsamples the window, forecasts every variant at `sub_horizon`, and
/// aggregates pairwise similarity into one score.
pub fn score_window(
    window: &SampleWindow,
    pipeline: &ScoringPipeline<'_>,
) -> Result<WindowScore, DetectError> {
    if pipeline.metric == Metric::Pearson && pipeline.sub_horizon < 2 {
        return Err(DetectError::SubHorizonTooShort(pipeline.sub_horizon));
    }
    let min_context = pipeline.spec.min_context();
    if pipeline.plan.len() < min_context {
        return Err(DetectError::SubsampleBelowMinContext {
            len: pipeline.plan.len(),
            min_context,
        });
    }

    let variants = apply_plan(window, pipeline.plan)?;
    let mut forecasts = Vec::with_capacity(variants.len());
    for (variant, context) in variants.iter().enumerate() {
        let prediction = forecast(pipeline.spec, context, pipeline.sub_horizon)
            .map_err(|source| DetectError::VariantForecast { variant, source })?;
        forecasts.push(prediction.values);
    }

    let (pair_scores, degenerate_pairs) = pairwise_scores_lenient(&forecasts, pipeline.metric)?;
    let score = match pipeline.subset {
        Some(subset) => aggregate(&pair_scores, subset)?,
        None => {
            let all: Vec<usize> = (0..pair_scores.scores.len()).collect();
            aggregate(&pair_scores, &all)?
        }
    };
    Ok(WindowScore {
        score,
        pair_scores,
        degenerate_pairs,
    })
}

/// Scores a batch of windows, in parallel when the `parallel` feature is
/// active. Output order matches input order either way.
pub fn score_windows(
    windows: &[SampleWindow],
    pipeline: &ScoringPipeline<'_>,
) -> Result<Vec<WindowScore>, DetectError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        windows
            .par_iter()
            .map(|w| score_window(w, pipeline))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        windows.iter().map(|w| score_window(w, pipeline)).collect()
    }
}

/// One detection decision. `adversarial` holds exactly when
/// `score < threshold`; ties count as benign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub window_id: usize,
    pub score: f64,
    pub threshold: f64,
    pub adversarial: bool,
    pub pair_scores: PairwiseScores,
    pub degenerate_pairs: Vec<(usize, usize)>,
}

/// Scores a window and applies the strict-less decision rule. In dynamic mode
/// a benign verdict's similarity is fed into the buffer after the verdict is
/// recorded, so a sample never influences its own threshold.
pub fn detect(
    window_id: usize,
    window: &SampleWindow,
    pipeline: &ScoringPipeline<'_>,
    model: &mut ThresholdModel,
) -> Result<Verdict, DetectError> {
    let scored = score_window(window, pipeline)?;
    let threshold = model.threshold;
    let adversarial = model.is_adversarial(scored.score);
    let verdict = Verdict {
        window_id,
        score: scored.score,
        threshold,
        adversarial,
        pair_scores: scored.pair_scores,
        degenerate_pairs: scored.degenerate_pairs,
    };
    if model.dynamic && !adversarial {
        model.dynamic_update(scored.score)?;
    }
    Ok(verdict)
}

/// Detects a batch. Fixed-threshold models score in parallel and decide
/// afterwards; dynamic models force ordered sequential processing.
/// `window_id` runs from `first_id` in input order.
pub fn detect_windows(
    windows: &[SampleWindow],
    pipeline: &ScoringPipeline<'_>,
    model: &mut ThresholdModel,
    first_id: usize,
) -> Result<Vec<Verdict>, DetectError> {
    if model.dynamic {
        windows
            .iter()
            .enumerate()
            .map(|(i, w)| detect(first_id + i, w, pipeline, model))
            .collect()
    } else {
        let scored = score_windows(windows, pipeline)?;
        Ok(scored
            .into_iter()
            .enumerate()
            .map(|(i, s)| Verdict {
                window_id: first_id + i,
                score: s.score,
                threshold: model.threshold,
                adversarial: model.is_adversarial(s.score),
                pair_scores: s.pair_scores,
                degenerate_pairs: s.degenerate_pairs,
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    Clean,
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub population: Population,
    pub window_id: usize,
    pub score: f64,
    pub threshold: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationCounts {
    pub clean_total: usize,
    pub clean_flagged: usize,
    pub adv_total: usize,
    pub adv_passed: usize,
}

/// FRR/FAR study over two verdict populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Flagged clean / total clean.
    pub frr: f64,
    /// Passed adversarial / total adversarial.
    pub far: f64,
    pub counts: EvaluationCounts,
    pub rows: Vec<EvaluationRow>,
}

impl EvaluationReport {
    /// FRR as a percentage rounded to one decimal, the convention used in
    /// reported tables (1 flagged of 66 reads 1.5).
    pub fn frr_percent(&self) -> f64 {
        (self.frr * 1000.0).round() / 10.0
    }

    pub fn far_percent(&self) -> f64 {
        (self.far * 1000.0).round() / 10.0
    }
}

/// Computes FRR and FAR from clean and adversarial verdicts.
pub fn evaluate(
    clean: &[Verdict],
    adversarial: &[Verdict],
) -> Result<EvaluationReport, DetectError> {
    if clean.is_empty() {
        return Err(DetectError::EmptyPopulation("clean"));
    }
    if adversarial.is_empty() {
        return Err(DetectError::EmptyPopulation("adversarial"));
    }
    let clean_flagged = clean.iter().filter(|v| v.adversarial).count();
    let adv_passed = adversarial.iter().filter(|v| !v.adversarial).count();
    let counts = EvaluationCounts {
        clean_total: clean.len(),
        clean_flagged,
        adv_total: adversarial.len(),
        adv_passed,
    };
    let mut rows = Vec::with_capacity(clean.len() + adversarial.len());
    for v in clean {
        rows.push(EvaluationRow {
            population: Population::Clean,
            window_id: v.window_id,
            score: v.score,
            threshold: v.threshold,
            flagged: v.adversarial,
        });
    }
    for v in adversarial {
        rows.push(EvaluationRow {
            population: Population::Adversarial,
            window_id: v.window_id,
            score: v.score,
            threshold: v.threshold,
            flagged: v.adversarial,
        });
    }
    Ok(EvaluationReport {
        frr: clean_flagged as f64 / clean.len() as f64,
        far: adv_passed as f64 / adversarial.len() as f64,
        counts,
        rows,
    })
}

/// Forecast-quality metrics for one prediction/truth pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastMetrics {
    pub mae: f64,
    pub mse: f64,
    pub r2: f64,
}

/// MAE, MSE and R-squared (1 - SSres/SStot about the truth mean). Truth must
/// be non-constant with at least two values, otherwise R-squared is
/// undefined.
pub fn forecast_metrics(pred: &[f64], truth: &[f64]) -> Result<ForecastMetrics, DetectError> {
    if pred.len() != truth.len() {
        return Err(DetectError::MetricsLengthMismatch {
            pred: pred.len(),
            truth: truth.len(),
        });
    }
    if truth.len() < 2 {
        return Err(DetectError::ConstantTruth);
    }
    let n = truth.len() as f64;
    let mae = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / n;
    let mse = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n;
    let truth_mean = truth.iter().sum::<f64>() / n;
    let ss_tot: f64 = truth.iter().map(|t| (t - truth_mean) * (t - truth_mean)).sum();
    if ss_tot == 0.0 {
        return Err(DetectError::ConstantTruth);
    }
    let ss_res: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(ForecastMetrics {
        mae,
        mse,
        r2: 1.0 - ss_res / ss_tot,
    })
}
