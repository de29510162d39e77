//! Subcommand implementations: calibrate, attack, detect, evaluate, report.

use std::path::{Path, PathBuf};

use ilid_core::attack::attack_windows;
use ilid_core::calibration::{CalibrationSet, ThresholdModel};
use ilid_core::detector::{detect_windows, evaluate, forecast_metrics, score_windows, ScoringPipeline};
use ilid_core::forecaster::{forecast, ForecasterSpec};
use ilid_core::series::{load_csv, make_windows, NormStats, SampleWindow};
use ilid_core::subsample::SubsamplePlan;

use crate::config::{ModelFile, RunConfig};
use crate::io;
use crate::CliError;

/// Dataset turned into normalized windows with a calibration/online split.
/// Window ids are global indices: calibration first, online after.
struct Prepared {
    calibration: Vec<(usize, SampleWindow)>,
    online: Vec<(usize, SampleWindow)>,
    stats: Option<NormStats>,
}

fn prepare_dataset(config: &RunConfig) -> Result<Prepared, CliError> {
    let d = &config.dataset;
    let series = load_csv(&d.csv, &d.column).map_err(|e| CliError::usage(e.to_string()))?;
    let windows = make_windows(&series, d.context_len, d.horizon, d.resolved_step())
        .map_err(|e| CliError::usage(e.to_string()))?;

    let n = windows.len();
    let n_cal = ((n as f64 * config.split.calibration_fraction).round() as usize).clamp(1, n - 1);

    // Normalization statistics come from the calibration split only; the
    // online split reuses them without contributing.
    let stats = if d.normalize {
        let calibration_values: Vec<f64> = windows[..n_cal]
            .iter()
            .flat_map(|w| {
                w.context
                    .iter()
                    .chain(w.truth.as_deref().unwrap_or_default())
                    .copied()
            })
            .collect();
        Some(NormStats::from_values(&calibration_values).map_err(|e| CliError::usage(e.to_string()))?)
    } else {
        None
    };

    let normalized: Vec<SampleWindow> = windows
        .into_iter()
        .map(|mut w| {
            if let Some(stats) = stats {
                for v in &mut w.context {
                    *v = stats.apply(*v);
                }
                if let Some(truth) = &mut w.truth {
                    for v in truth {
                        *v = stats.apply(*v);
                    }
                }
            }
            w
        })
        .collect();

    let mut with_ids: Vec<(usize, SampleWindow)> = normalized.into_iter().enumerate().collect();
    let online = with_ids.split_off(n_cal);
    Ok(Prepared {
        calibration: with_ids,
        online,
        stats,
    })
}

fn pipeline<'a>(
    spec: &'a ForecasterSpec,
    plan: &'a SubsamplePlan,
    config: &'a RunConfig,
) -> ScoringPipeline<'a> {
    let mut p = ScoringPipeline::new(
        spec,
        plan,
        config.similarity.metric,
        config.resolved_sub_horizon(),
    );
    if let Some(subset) = &config.similarity.subset {
        p = p.with_subset(subset);
    }
    p
}

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out.display())))
}

fn bare_windows(windows: &[(usize, SampleWindow)]) -> Vec<SampleWindow> {
    windows.iter().map(|(_, w)| w.clone()).collect()
}

pub fn cmd_calibrate(
    config: &RunConfig,
    out: &Path,
    model_path: Option<PathBuf>,
) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let prepared = prepare_dataset(config)?;
    let plan = config.build_plan()?;
    let pipe = pipeline(&config.forecaster, &plan, config);

    let windows = bare_windows(&prepared.calibration);
    let scored = score_windows(&windows, &pipe).map_err(|e| CliError::runtime(e.to_string()))?;
    let similarities: Vec<f64> = scored.iter().map(|s| s.score).collect();
    let cal_set =
        CalibrationSet::new(similarities.clone()).map_err(|e| CliError::runtime(e.to_string()))?;
    let model = ThresholdModel::calibrate(
        &cal_set,
        config.threshold.estimator,
        config.threshold.preset_frr,
        config.threshold.dynamic,
        config.threshold.buffer_size,
    )
    .map_err(|e| CliError::runtime(e.to_string()))?;

    let flagged = similarities.iter().filter(|&&s| s < model.threshold).count();
    let n = similarities.len();
    println!("calibration samples: {n}");
    println!(
        "threshold: {:.6} ({:?} estimator, preset FRR {:.2}%)",
        model.threshold,
        model.estimator,
        model.preset_frr * 100.0
    );
    println!(
        "offline flagged: {flagged}/{n} ({:.1}%)",
        flagged as f64 / n as f64 * 100.0
    );

    let file = ModelFile {
        model,
        metric: config.similarity.metric,
        plan,
        subset: config.similarity.subset.clone(),
        sub_horizon: config.resolved_sub_horizon(),
        forecaster: config.forecaster.clone(),
        norm_stats: prepared.stats,
        calibration_n: n,
        config: config.clone(),
        seed: config.seed,
    };
    let path = model_path.unwrap_or_else(|| out.join("model.json"));
    file.save(&path)?;
    println!("model written to {}", path.display());
    Ok(())
}

/// Pooled forecast-quality metrics: all horizons of all windows concatenated
/// into one prediction/truth pair, so per-window constant truths cannot make
/// the table undefined.
fn pooled_metrics(
    spec: &ForecasterSpec,
    windows: &[(usize, SampleWindow)],
    contexts: &[Vec<f64>],
    horizon: usize,
) -> Result<Option<ilid_core::detector::ForecastMetrics>, CliError> {
    let mut preds = Vec::new();
    let mut truths = Vec::new();
    for ((_, window), context) in windows.iter().zip(contexts) {
        let Some(truth) = &window.truth else {
            return Ok(None);
        };
        if truth.len() != horizon {
            return Ok(None);
        }
        let prediction =
            forecast(spec, context, horizon).map_err(|e| CliError::runtime(e.to_string()))?;
        preds.extend(prediction.values);
        truths.extend(truth.iter().copied());
    }
    forecast_metrics(&preds, &truths)
        .map(Some)
        .map_err(|e| CliError::runtime(e.to_string()))
}

pub fn cmd_attack(
    config: &RunConfig,
    out: &Path,
    windows_file: Option<PathBuf>,
) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let attack_cfg = config
        .attack
        .as_ref()
        .ok_or_else(|| CliError::usage("config has no attack section".into()))?;
    let targets = match windows_file {
        Some(path) => io::read_windows(&path)?,
        None => prepare_dataset(config)?.online,
    };
    let horizon = config.dataset.horizon;

    let windows = bare_windows(&targets);
    let results = attack_windows(&windows, &config.forecaster, attack_cfg, horizon)
        .map_err(|e| CliError::runtime(e.to_string()))?;

    let adversarial: Vec<(usize, SampleWindow)> = targets
        .iter()
        .zip(&results)
        .map(|((id, window), result)| {
            (
                *id,
                SampleWindow {
                    context: result.perturbed_context.clone(),
                    truth: window.truth.clone(),
                    origin_index: window.origin_index,
                },
            )
        })
        .collect();

    let windows_path = out.join("adversarial_windows.csv");
    io::write_windows(&windows_path, &adversarial)?;
    let rows: Vec<(usize, &ilid_core::attack::AttackResult)> = targets
        .iter()
        .map(|(id, _)| *id)
        .zip(results.iter())
        .collect();
    io::write_attack_results(
        &out.join("attack.csv"),
        attack_cfg.method.name(),
        attack_cfg.epsilon,
        &rows,
    )?;

    let clean_contexts: Vec<Vec<f64>> = targets.iter().map(|(_, w)| w.context.clone()).collect();
    let adv_contexts: Vec<Vec<f64>> = results
        .iter()
        .map(|r| r.perturbed_context.clone())
        .collect();
    let clean = pooled_metrics(&config.forecaster, &targets, &clean_contexts, horizon)?;
    let adv = pooled_metrics(&config.forecaster, &targets, &adv_contexts, horizon)?;
    match (clean, adv) {
        (Some(clean), Some(adv)) => {
            println!(
                "forecasting quality under {} (epsilon {:.3}):",
                attack_cfg.method.name(),
                attack_cfg.epsilon
            );
            println!("{:<12} {:>9} {:>9} {:>9}", "population", "MAE", "MSE", "R2");
            for (label, m) in [("clean", clean), ("adversarial", adv)] {
                println!(
                    "{label:<12} {:>9.4} {:>9.4} {:>8.1}%",
                    m.mae,
                    m.mse,
                    m.r2 * 100.0
                );
            }
        }
        _ => println!("windows carry no truth; skipping the efficacy table"),
    }
    println!("adversarial windows written to {}", windows_path.display());
    Ok(())
}

fn detect_population(
    model_file: &ModelFile,
    model: &mut ThresholdModel,
    windows: &[(usize, SampleWindow)],
) -> Result<Vec<ilid_core::detector::Verdict>, CliError> {
    let mut pipe = ScoringPipeline::new(
        &model_file.forecaster,
        &model_file.plan,
        model_file.metric,
        model_file.sub_horizon,
    );
    if let Some(subset) = &model_file.subset {
        pipe = pipe.with_subset(subset);
    }
    // Ids are carried through from the input, so detect one by one keeping
    // order; dynamic buffers require that order anyway.
    let mut verdicts = Vec::with_capacity(windows.len());
    if model.dynamic {
        for (id, window) in windows {
            let vs = detect_windows(std::slice::from_ref(window), &pipe, model, *id)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            verdicts.extend(vs);
        }
    } else {
        let bare = bare_windows(windows);
        let batch = detect_windows(&bare, &pipe, model, 0)
            .map_err(|e| CliError::runtime(e.to_string()))?;
        for ((id, _), mut verdict) in windows.iter().zip(batch) {
            verdict.window_id = *id;
            verdicts.push(verdict);
        }
    }
    Ok(verdicts)
}

pub fn cmd_detect(
    config: &RunConfig,
    model_path: &Path,
    out: &Path,
    windows_file: Option<PathBuf>,
    diagnostic: bool,
) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let model_file = ModelFile::load(model_path)?;
    model_file.check_compatible(config)?;
    let targets = match windows_file {
        Some(path) => io::read_windows(&path)?,
        None => prepare_dataset(config)?.online,
    };

    let mut model = model_file.model.clone();
    let verdicts = detect_population(&model_file, &mut model, &targets)?;
    io::write_verdicts(&out.join("verdicts.csv"), &verdicts)?;
    io::write_similarities(&out.join("similarities.csv"), &verdicts, model_file.plan.count())?;
    if diagnostic {
        write_full_forecast_diagnostic(config, &model_file, &targets, out)?;
    }

    let flagged = verdicts.iter().filter(|v| v.adversarial).count();
    println!("flagged {flagged}/{} windows", verdicts.len());
    if model.dynamic {
        println!("final dynamic threshold: {:.6}", model.threshold);
    }
    Ok(())
}

/// Report-only diagnostic: similarity of each subsample forecast to the
/// forecast of the full-length context. Never a detection input; requires the
/// subsample horizon to equal the task horizon so the vectors compare.
fn write_full_forecast_diagnostic(
    config: &RunConfig,
    model_file: &ModelFile,
    targets: &[(usize, SampleWindow)],
    out: &Path,
) -> Result<(), CliError> {
    use ilid_core::similarity::{distance_similarity, pearson, Metric};
    use ilid_core::subsample::apply_plan;

    if model_file.sub_horizon != config.dataset.horizon {
        println!(
            "sub_horizon {} differs from task horizon {}; skipping the full-forecast diagnostic",
            model_file.sub_horizon, config.dataset.horizon
        );
        return Ok(());
    }
    let mut writer = csv::Writer::from_path(out.join("full_forecast_diagnostic.csv"))
        .map_err(|e| CliError::runtime(e.to_string()))?;
    writer
        .write_record(["window_id", "variant", "score"])
        .map_err(|e| CliError::runtime(e.to_string()))?;
    for (id, window) in targets {
        let full = forecast(&model_file.forecaster, &window.context, config.dataset.horizon)
            .map_err(|e| CliError::runtime(e.to_string()))?;
        let variants =
            apply_plan(window, &model_file.plan).map_err(|e| CliError::runtime(e.to_string()))?;
        for (variant, context) in variants.iter().enumerate() {
            let sub = forecast(&model_file.forecaster, context, model_file.sub_horizon)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            let score = match model_file.metric {
                Metric::Pearson => pearson(&sub.values, &full.values).unwrap_or(0.0),
                m => distance_similarity(&sub.values, &full.values, m)
                    .map_err(|e| CliError::runtime(e.to_string()))?,
            };
            writer
                .write_record([id.to_string(), variant.to_string(), score.to_string()])
                .map_err(|e| CliError::runtime(e.to_string()))?;
        }
    }
    writer.flush().map_err(|e| CliError::runtime(e.to_string()))
}

pub fn cmd_evaluate(
    config: &RunConfig,
    model_path: &Path,
    out: &Path,
    clean_file: Option<PathBuf>,
    adv_file: &Path,
) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let model_file = ModelFile::load(model_path)?;
    model_file.check_compatible(config)?;
    let clean = match clean_file {
        Some(path) => io::read_windows(&path)?,
        None => prepare_dataset(config)?.online,
    };
    let adversarial = io::read_windows(adv_file)?;

    // One model instance for the whole online pass: clean windows first,
    // then adversarial, so dynamic updates accumulated on the clean stream
    // carry into the adversarial stream.
    let mut model = model_file.model.clone();
    let clean_verdicts = detect_population(&model_file, &mut model, &clean)?;
    let adv_verdicts = detect_population(&model_file, &mut model, &adversarial)?;

    let report =
        evaluate(&clean_verdicts, &adv_verdicts).map_err(|e| CliError::runtime(e.to_string()))?;
    io::write_verdicts(&out.join("verdicts_clean.csv"), &clean_verdicts)?;
    io::write_verdicts(&out.join("verdicts_adv.csv"), &adv_verdicts)?;
    io::write_similarities(
        &out.join("similarities_clean.csv"),
        &clean_verdicts,
        model_file.plan.count(),
    )?;
    io::write_similarities(
        &out.join("similarities_adv.csv"),
        &adv_verdicts,
        model_file.plan.count(),
    )?;

    let clean_scores: Vec<f64> = clean_verdicts.iter().map(|v| v.score).collect();
    let adv_scores: Vec<f64> = adv_verdicts.iter().map(|v| v.score).collect();
    io::write_histogram(
        &out.join("histogram.csv"),
        &clean_scores,
        &adv_scores,
        model_file.model.threshold,
        30,
    )?;
    io::write_json(
        &out.join("evaluation.json"),
        &io::EvaluationDocument {
            frr: report.frr,
            far: report.far,
            frr_percent: report.frr_percent(),
            far_percent: report.far_percent(),
            counts: report.counts,
            config: config.clone(),
            seed: config.seed,
        },
    )?;

    println!(
        "FRR {:.1}% ({}/{} clean flagged), FAR {:.1}% ({}/{} adversarial passed)",
        report.frr_percent(),
        report.counts.clean_flagged,
        report.counts.clean_total,
        report.far_percent(),
        report.counts.adv_passed,
        report.counts.adv_total
    );
    Ok(())
}

pub fn cmd_report(
    model_path: &Path,
    out: &Path,
    clean_verdicts_path: &Path,
    adv_verdicts_path: &Path,
) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let model_file = ModelFile::load(model_path)?;
    let clean = io::read_verdicts(clean_verdicts_path)?;
    let adversarial = io::read_verdicts(adv_verdicts_path)?;
    let report = evaluate(&clean, &adversarial).map_err(|e| CliError::runtime(e.to_string()))?;

    let clean_scores: Vec<f64> = clean.iter().map(|v| v.score).collect();
    let adv_scores: Vec<f64> = adversarial.iter().map(|v| v.score).collect();
    io::write_histogram(
        &out.join("histogram.csv"),
        &clean_scores,
        &adv_scores,
        model_file.model.threshold,
        30,
    )?;
    io::write_json(
        &out.join("evaluation.json"),
        &io::EvaluationDocument {
            frr: report.frr,
            far: report.far,
            frr_percent: report.frr_percent(),
            far_percent: report.far_percent(),
            counts: report.counts,
            config: model_file.config.clone(),
            seed: model_file.seed,
        },
    )?;
    println!(
        "FRR {:.1}%, FAR {:.1}% over {} clean / {} adversarial verdicts",
        report.frr_percent(),
        report.far_percent(),
        report.counts.clean_total,
        report.counts.adv_total
    );
    Ok(())
}
