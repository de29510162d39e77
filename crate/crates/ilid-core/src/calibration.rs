//! Threshold estimation from benign similarities at a preset FRR.
//!
//! Two estimators: the order statistic (exact finite-sample control, the
//! default) and the Gaussian quantile. With the strict-less decision rule a
//! distinct-valued calibration set of size N leaves exactly floor(frr * N)
//! samples below the order-statistic threshold.
//!
//! The dynamic variant keeps a fixed-capacity FIFO buffer of recent
//! benign-classified similarities and recomputes the threshold after each
//! accepted sample.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normal::phi_inv;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("need at least 2 calibration similarities, got {0}")]
    TooFewSamples(usize),
    #[error("similarity at position {0} is not finite")]
    NotFinite(usize),
    #[error("preset FRR {frr} with N={n} leaves no admissible order statistic")]
    FrrOutOfRange { frr: f64, n: usize },
    #[error("calibration similarities have zero variance")]
    ZeroVariance,
    #[error("dynamic update called on a non-dynamic model")]
    NotDynamic,
    #[error("similarity {value} is below the current threshold {threshold}; only benign-classified samples feed the buffer")]
    RejectedSample { value: f64, threshold: f64 },
}

/// One aggregated similarity per benign calibration sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSet {
    pub similarities: Vec<f64>,
}

impl CalibrationSet {
    pub fn new(similarities: Vec<f64>) -> Result<Self, CalibrationError> {
        if similarities.len() < 2 {
            return Err(CalibrationError::TooFewSamples(similarities.len()));
        }
        if let Some(pos) = similarities.iter().position(|v| !v.is_finite()) {
            return Err(CalibrationError::NotFinite(pos));
        }
        Ok(Self { similarities })
    }

    pub fn len(&self) -> usize {
        self.similarities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.similarities.is_empty()
    }
}

/// Which threshold estimator a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    OrderStatistic,
    Gaussian,
}

/// The (i+1)-th smallest similarity with i = floor(frr * N).
///
/// Under the strict-less rule exactly i distinct-valued calibration samples
/// fall below the returned threshold, so the offline FRR is i/N. `frr = 0`
/// yields the minimum (nothing flagged).
pub fn order_statistic_threshold(cal: &CalibrationSet, frr: f64) -> Result<f64, CalibrationError> {
    let n = cal.len();
    if !(0.0..1.0).contains(&frr) {
        return Err(CalibrationError::FrrOutOfRange { frr, n });
    }
    let i = (frr * n as f64).floor() as usize;
    if i >= n {
        return Err(CalibrationError::FrrOutOfRange { frr, n });
    }
    let mut sorted = cal.similarities.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite by construction"));
    Ok(sorted[i])
}

/// Gaussian-quantile threshold: mean + std * phi_inv(frr), with the sample
/// (n-1) standard deviation.
pub fn gaussian_threshold(cal: &CalibrationSet, frr: f64) -> Result<f64, CalibrationError> {
    let n = cal.len();
    if !(0.0..1.0).contains(&frr) || frr == 0.0 {
        return Err(CalibrationError::FrrOutOfRange { frr, n });
    }
    let mean = cal.similarities.iter().sum::<f64>() / n as f64;
    let var = cal
        .similarities
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (n as f64 - 1.0);
    if var <= 0.0 {
        return Err(CalibrationError::ZeroVariance);
    }
    Ok(mean + var.sqrt() * phi_inv(frr))
}

fn estimate(estimator: Estimator, cal: &CalibrationSet, frr: f64) -> Result<f64, CalibrationError> {
    match estimator {
        Estimator::OrderStatistic => order_statistic_threshold(cal, frr),
        Estimator::Gaussian => gaussian_threshold(cal, frr),
    }
}

/// A calibrated threshold plus the state needed to keep it current online.
///
/// In dynamic mode the buffer holds the most recent benign-classified
/// similarities (oldest first, fixed capacity) and the threshold is
/// recomputed from the buffer after every accepted sample. Updates must be
/// serialized by a single writer; reading the threshold between updates is
/// safe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdModel {
    pub estimator: Estimator,
    pub preset_frr: f64,
    pub threshold: f64,
    pub buffer: VecDeque<f64>,
    pub capacity: usize,
    pub dynamic: bool,
}

impl ThresholdModel {
    /// Calibrates a model from benign similarities. `capacity` is the dynamic
    /// buffer size B, defaulting to the offline sample count; the most recent
    /// `B` calibration similarities seed the buffer.
    pub fn calibrate(
        cal: &CalibrationSet,
        estimator: Estimator,
        preset_frr: f64,
        dynamic: bool,
        capacity: Option<usize>,
    ) -> Result<Self, CalibrationError> {
        let threshold = estimate(estimator, cal, preset_frr)?;
        let capacity = capacity.unwrap_or(cal.len()).max(2);
        let skip = cal.len().saturating_sub(capacity);
        let buffer: VecDeque<f64> = cal.similarities.iter().skip(skip).copied().collect();
        Ok(Self {
            estimator,
            preset_frr,
            threshold,
            buffer,
            capacity,
            dynamic,
        })
    }

    /// Strict-less decision rule: a score below the threshold is adversarial,
    /// ties count as benign.
    pub fn is_adversarial(&self, score: f64) -> bool {
        score < self.threshold
    }

    /// Feeds one benign-classified similarity into the buffer, evicting the
    /// oldest entry once the buffer is full, and recomputes the threshold
    /// with the same estimator and preset FRR.
    pub fn dynamic_update(&mut self, accepted_similarity: f64) -> Result<(), CalibrationError> {
        if !self.dynamic {
            return Err(CalibrationError::NotDynamic);
        }
        if self.is_adversarial(accepted_similarity) {
            return Err(CalibrationError::RejectedSample {
                value: accepted_similarity,
                threshold: self.threshold,
            });
        }
        if self.buffer.len() >= self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(accepted_similarity);
        let cal = CalibrationSet::new(self.buffer.iter().copied().collect())?;
        self.threshold = estimate(self.estimator, &cal, self.preset_frr)?;
        Ok(())
    }
}
