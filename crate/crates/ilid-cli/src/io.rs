//! Flat-file formats: windows, verdicts, similarities, attack results and
//! histogram bins as CSV, evaluation summaries as JSON. Everything is UTF-8
//! and written in deterministic order so identical runs produce byte-identical
//! files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ilid_core::detector::{EvaluationCounts, Verdict};
use ilid_core::series::SampleWindow;

use crate::config::RunConfig;
use crate::CliError;

fn open_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>, CliError> {
    csv::Reader::from_path(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

#[derive(Debug, Serialize, Deserialize)]
struct WindowRow {
    window_id: usize,
    role: String,
    index: usize,
    value: f64,
}

/// Writes windows as (window_id, role, index, value) rows, contexts before
/// truths, windows in the given order.
pub fn write_windows(
    path: &Path,
    windows: &[(usize, SampleWindow)],
) -> Result<(), CliError> {
    let mut writer = open_writer(path)?;
    for (id, window) in windows {
        for (index, value) in window.context.iter().enumerate() {
            writer
                .serialize(WindowRow {
                    window_id: *id,
                    role: "context".into(),
                    index,
                    value: *value,
                })
                .map_err(|e| CliError::runtime(e.to_string()))?;
        }
        if let Some(truth) = &window.truth {
            for (index, value) in truth.iter().enumerate() {
                writer
                    .serialize(WindowRow {
                        window_id: *id,
                        role: "truth".into(),
                        index,
                        value: *value,
                    })
                    .map_err(|e| CliError::runtime(e.to_string()))?;
            }
        }
    }
    writer.flush().map_err(|e| CliError::runtime(e.to_string()))
}

/// Reads windows back, ordered by window id.
pub fn read_windows(path: &Path) -> Result<Vec<(usize, SampleWindow)>, CliError> {
    let mut reader = open_reader(path)?;
    let mut contexts: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    let mut truths: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for record in reader.deserialize() {
        let row: WindowRow =
            record.map_err(|e| CliError::usage(format!("bad window row in {}: {e}", path.display())))?;
        match row.role.as_str() {
            "context" => contexts.entry(row.window_id).or_default().push((row.index, row.value)),
            "truth" => truths.entry(row.window_id).or_default().push((row.index, row.value)),
            other => {
                return Err(CliError::usage(format!(
                    "unknown role {other:?} in {}",
                    path.display()
                )))
            }
        }
    }
    let mut windows = Vec::with_capacity(contexts.len());
    for (id, mut context_rows) in contexts {
        context_rows.sort_by_key(|(index, _)| *index);
        let context = context_rows.into_iter().map(|(_, v)| v).collect();
        let truth = truths.remove(&id).map(|mut rows| {
            rows.sort_by_key(|(index, _)| *index);
            rows.into_iter().map(|(_, v)| v).collect()
        });
        windows.push((
            id,
            SampleWindow {
                context,
                truth,
                origin_index: 0,
            },
        ));
    }
    if windows.is_empty() {
        return Err(CliError::usage(format!("no windows in {}", path.display())));
    }
    Ok(windows)
}

#[derive(Debug, Serialize)]
struct VerdictRow<'a> {
    window_id: usize,
    score: f64,
    threshold: f64,
    adversarial: bool,
    degenerate_pairs: &'a str,
}

pub fn write_verdicts(path: &Path, verdicts: &[Verdict]) -> Result<(), CliError> {
    let mut writer = open_writer(path)?;
    for v in verdicts {
        let degenerate = v
            .degenerate_pairs
            .iter()
            .map(|(i, j)| format!("{i}-{j}"))
            .collect::<Vec<_>>()
            .join(";");
        writer
            .serialize(VerdictRow {
                window_id: v.window_id,
                score: v.score,
                threshold: v.threshold,
                adversarial: v.adversarial,
                degenerate_pairs: &degenerate,
            })
            .map_err(|e| CliError::runtime(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::runtime(e.to_string()))
}

#[derive(Debug, Deserialize)]
struct VerdictRowIn {
    window_id: usize,
    score: f64,
    threshold: f64,
    adversarial: bool,
    #[serde(default)]
    #[allow(dead_code)]
    degenerate_pairs: String,
}

/// Reads the summary columns back; pair scores are not reconstructed.
pub fn read_verdicts(path: &Path) -> Result<Vec<Verdict>, CliError> {
    use ilid_core::similarity::{Metric, PairwiseScores};
    let mut reader = open_reader(path)?;
    let mut verdicts = Vec::new();
    for record in reader.deserialize() {
        let row: VerdictRowIn =
            record.map_err(|e| CliError::usage(format!("bad verdict row in {}: {e}", path.display())))?;
        verdicts.push(Verdict {
            window_id: row.window_id,
            score: row.score,
            threshold: row.threshold,
            adversarial: row.adversarial,
            pair_scores: PairwiseScores {
                metric: Metric::Pearson,
                scores: Vec::new(),
            },
            degenerate_pairs: Vec::new(),
        });
    }
    if verdicts.is_empty() {
        return Err(CliError::usage(format!("no verdicts in {}", path.display())));
    }
    Ok(verdicts)
}

#[derive(Debug, Serialize)]
struct SimilarityRow {
    window_id: usize,
    pair_i: usize,
    pair_j: usize,
    score: f64,
}

/// One row per pairwise score, pairs in lexicographic order.
pub fn write_similarities(path: &Path, verdicts: &[Verdict], s: usize) -> Result<(), CliError> {
    let pairs = ilid_core::similarity::pair_indices(s);
    let mut writer = open_writer(path)?;
    for v in verdicts {
        for ((i, j), score) in pairs.iter().zip(&v.pair_scores.scores) {
            writer
                .serialize(SimilarityRow {
                    window_id: v.window_id,
                    pair_i: *i,
                    pair_j: *j,
                    score: *score,
                })
                .map_err(|e| CliError::runtime(e.to_string()))?;
        }
    }
    writer.flush().map_err(|e| CliError::runtime(e.to_string()))
}

#[derive(Debug, Serialize)]
struct AttackRow<'a> {
    window_id: usize,
    method: &'a str,
    epsilon: f64,
    linf: f64,
    queries: usize,
    mask: String,
}

pub fn write_attack_results(
    path: &Path,
    method: &str,
    epsilon: f64,
    results: &[(usize, &ilid_core::attack::AttackResult)],
) -> Result<(), CliError> {
    let mut writer = open_writer(path)?;
    for (id, result) in results {
        let mask = result
            .mask
            .as_ref()
            .map(|m| m.iter().map(usize::to_string).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        writer
            .serialize(AttackRow {
                window_id: *id,
                method,
                epsilon,
                linf: result.linf,
                queries: result.queries,
                mask,
            })
            .map_err(|e| CliError::runtime(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::runtime(e.to_string()))
}

#[derive(Debug, Serialize)]
struct HistogramRow {
    bin_left: f64,
    bin_right: f64,
    clean_count: usize,
    adv_count: usize,
    threshold: f64,
}

/// Fixed-width bins over the combined score range, enough to redraw the
/// offline/online similarity histograms.
pub fn write_histogram(
    path: &Path,
    clean_scores: &[f64],
    adv_scores: &[f64],
    threshold: f64,
    bins: usize,
) -> Result<(), CliError> {
    let all = clean_scores.iter().chain(adv_scores);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in all {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(CliError::runtime("no scores to bin".into()));
    }
    if hi == lo {
        hi = lo + 1e-9;
    }
    let width = (hi - lo) / bins as f64;
    let bin_of = |v: f64| (((v - lo) / width) as usize).min(bins - 1);
    let mut clean_counts = vec![0usize; bins];
    let mut adv_counts = vec![0usize; bins];
    for &v in clean_scores {
        clean_counts[bin_of(v)] += 1;
    }
    for &v in adv_scores {
        adv_counts[bin_of(v)] += 1;
    }
    let mut writer = open_writer(path)?;
    for b in 0..bins {
        writer
            .serialize(HistogramRow {
                bin_left: lo + b as f64 * width,
                bin_right: lo + (b + 1) as f64 * width,
                clean_count: clean_counts[b],
                adv_count: adv_counts[b],
                threshold,
            })
            .map_err(|e| CliError::runtime(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::runtime(e.to_string()))
}

/// The evaluation summary: rates, counts and the exact resolved config.
#[derive(Debug, Serialize, Deserialize)]
pub struct EvaluationDocument {
    pub frr: f64,
    pub far: f64,
    pub frr_percent: f64,
    pub far_percent: f64,
    pub counts: EvaluationCounts,
    pub config: RunConfig,
    pub seed: u64,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::runtime(format!("cannot serialize {}: {e}", path.display())))?;
    std::fs::write(path, json + "\n")
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}
