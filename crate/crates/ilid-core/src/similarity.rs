//! Pairwise similarity among subsample forecasts.
//!
//! Pearson correlation plus distance-derived similarities 1/(1 + d) for the
//! L2 and L1 distances. Pair order is fixed to lexicographic
//! (0,1),(0,2),...,(S-2,S-1) so that subset indices in configs and reports are
//! unambiguous.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("need at least {min} values, got {got}")]
    TooShort { min: usize, got: usize },
    #[error("vector lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("undefined correlation for pair ({i}, {j}): zero variance")]
    UndefinedCorrelation { i: usize, j: usize },
    #[error("need at least 2 forecasts, got {0}")]
    TooFewForecasts(usize),
    #[error("subset is empty")]
    EmptySubset,
    #[error("subset index {index} out of range for {scores} scores")]
    SubsetOutOfRange { index: usize, scores: usize },
}

/// Similarity metric between two equal-length forecasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Pearson,
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Pearson => "pearson",
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
        }
    }
}

/// The m = S(S-1)/2 pairwise scores of one window, in lexicographic pair
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseScores {
    pub metric: Metric,
    pub scores: Vec<f64>,
}

/// Lexicographic pair order for S items: (0,1),(0,2),...,(S-2,S-1).
pub fn pair_indices(s: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(s * (s - 1) / 2);
    for i in 0..s {
        for j in (i + 1)..s {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Sample Pearson correlation coefficient.
///
/// The n-1 normalization cancels between numerator and denominator; the
/// centered-sum form below is the documented formula for cross-language
/// bit-compatibility.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    if a.len() != b.len() {
        return Err(SimilarityError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.len() < 2 {
        return Err(SimilarityError::TooShort { min: 2, got: a.len() });
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(SimilarityError::UndefinedCorrelation { i: 0, j: 0 });
    }
    // One sqrt of the product rather than a product of sqrts: identical
    // vectors then score exactly 1.0.
    Ok(cov / (var_a * var_b).sqrt())
}

/// Distance-derived similarity 1/(1 + d), in (0, 1], equal to 1 iff a = b.
pub fn distance_similarity(a: &[f64], b: &[f64], metric: Metric) -> Result<f64, SimilarityError> {
    if a.len() != b.len() {
        return Err(SimilarityError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.is_empty() {
        return Err(SimilarityError::TooShort { min: 1, got: 0 });
    }
    let distance = match metric {
        Metric::Euclidean => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>(),
        Metric::Pearson => {
            return pearson(a, b);
        }
    };
    Ok(1.0 / (1.0 + distance))
}

fn score_pair(a: &[f64], b: &[f64], metric: Metric) -> Result<f64, SimilarityError> {
    match metric {
        Metric::Pearson => pearson(a, b),
        Metric::Euclidean | Metric::Manhattan => distance_similarity(a, b, metric),
    }
}

/// All pairwise scores of S forecasts. An undefined Pearson correlation is an
/// error carrying the offending pair; see [`pairwise_scores_lenient`] for the
/// online policy.
pub fn pairwise_scores(
    forecasts: &[Vec<f64>],
    metric: Metric,
) -> Result<PairwiseScores, SimilarityError> {
    check_forecasts(forecasts, metric)?;
    let mut scores = Vec::with_capacity(forecasts.len() * (forecasts.len() - 1) / 2);
    for (i, j) in pair_indices(forecasts.len()) {
        let score = score_pair(&forecasts[i], &forecasts[j], metric).map_err(|e| match e {
            SimilarityError::UndefinedCorrelation { .. } => {
                SimilarityError::UndefinedCorrelation { i, j }
            }
            other => other,
        })?;
        scores.push(score);
    }
    Ok(PairwiseScores { metric, scores })
}

/// Like [`pairwise_scores`], but a pair with undefined correlation scores 0.0
/// instead of failing, and the affected pairs are returned for logging. A
/// collapsed constant forecast is itself anomalous, so 0.0 (maximally
/// dissimilar) is the conservative online choice.
pub fn pairwise_scores_lenient(
    forecasts: &[Vec<f64>],
    metric: Metric,
) -> Result<(PairwiseScores, Vec<(usize, usize)>), SimilarityError> {
    check_forecasts(forecasts, metric)?;
    let mut scores = Vec::with_capacity(forecasts.len() * (forecasts.len() - 1) / 2);
    let mut degenerate = Vec::new();
    for (i, j) in pair_indices(forecasts.len()) {
        match score_pair(&forecasts[i], &forecasts[j], metric) {
            Ok(score) => scores.push(score),
            Err(SimilarityError::UndefinedCorrelation { .. }) => {
                degenerate.push((i, j));
                scores.push(0.0);
            }
            Err(other) => return Err(other),
        }
    }
    Ok((PairwiseScores { metric, scores }, degenerate))
}

fn check_forecasts(forecasts: &[Vec<f64>], metric: Metric) -> Result<(), SimilarityError> {
    if forecasts.len() < 2 {
        return Err(SimilarityError::TooFewForecasts(forecasts.len()));
    }
    let len = forecasts[0].len();
    for f in forecasts {
        if f.len() != len {
            return Err(SimilarityError::LengthMismatch { a: len, b: f.len() });
        }
    }
    let min = if metric == Metric::Pearson { 2 } else { 1 };
    if len < min {
        return Err(SimilarityError::TooShort { min, got: len });
    }
    Ok(())
}

/// Arithmetic mean of the selected scores.
pub fn aggregate(scores: &PairwiseScores, subset: &[usize]) -> Result<f64, SimilarityError> {
    if subset.is_empty() {
        return Err(SimilarityError::EmptySubset);
    }
    let mut sum = 0.0;
    for &index in subset {
        let score = scores
            .scores
            .get(index)
            .ok_or(SimilarityError::SubsetOutOfRange {
                index,
                scores: scores.scores.len(),
            })?;
        sum += score;
    }
    Ok(sum / subset.len() as f64)
}
