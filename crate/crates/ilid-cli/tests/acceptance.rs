//! Acceptance suite: one test per criterion, each printing a pass line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.
//!
//! Golden values were recorded on the first validated run of the bundled
//! seeded scenario (x86-64 Linux); every quantity in that scenario is a pure
//! function of fixed seeds, so reruns must reproduce them bit-exactly.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ilid_core::attack::{attack_windows, fgsm, run_attack, AttackConfig, AttackMethod};
use ilid_core::calibration::{
    gaussian_threshold, order_statistic_threshold, CalibrationSet, Estimator, ThresholdModel,
};
use ilid_core::detector::{
    detect, evaluate, forecast_metrics, score_windows, ScoringPipeline, Verdict,
};
use ilid_core::forecaster::{forecast, loss_gradient, target_loss, ForecasterSpec};
use ilid_core::normal::{phi, phi_inv};
use ilid_core::series::{make_windows, SampleWindow, TimeSeries};
use ilid_core::similarity::{distance_similarity, pearson, Metric, PairwiseScores};
use ilid_core::subsample::stride_plan;
use ilid_core::synthetic::{golden_attack_config, golden_scenario, GoldenScenario};

// ---------------------------------------------------------------------------
// Golden values (first validated run).

const GOLDEN_CLEAN_MSE: f64 = 0.23297387213531484;
const GOLDEN_MSE: [(&str, f64); 4] = [
    ("fgsm", 0.30117267860413205),
    ("bim", 0.30114096997975276),
    ("pgd", 0.3010916332708318),
    ("dga", 0.29387980112116563),
];
const GOLDEN_MEAN_LOSS_RED: [(&str, f64); 4] = [
    ("fgsm", 0.10292392695951401),
    ("bim", 0.10312350659052955),
    ("pgd", 0.10309194370424937),
    ("dga", 0.09429960080988735),
];
const GOLDEN_PGD_GE_BIM: usize = 87;
const GOLDEN_BIM_GE_FGSM: usize = 100;

const GOLDEN_THRESHOLD: f64 = 0.9856815486233994;
const GOLDEN_MEAN_CLEAN_SIM: f64 = 0.9963169439078807;
const GOLDEN_MEAN_ADV_SIM: f64 = 0.8898166618338773;
const GOLDEN_FIXED_FRR: f64 = 0.03;
const GOLDEN_FIXED_FAR: f64 = 0.12;
const GOLDEN_DYNAMIC_FRR: f64 = 0.03;
const GOLDEN_DYNAMIC_FAR: f64 = 0.11;

// ---------------------------------------------------------------------------
// Shared golden-scenario study, computed once for criteria 5-7.

struct GoldenStudy {
    scenario: GoldenScenario,
    clean_mse: f64,
    adv_mse: BTreeMap<&'static str, f64>,
    loss_reductions: BTreeMap<&'static str, Vec<f64>>,
    attack_results: BTreeMap<&'static str, Vec<ilid_core::attack::AttackResult>>,
    threshold: f64,
    mean_clean_sim: f64,
    mean_adv_sim: f64,
    fixed_rates: (f64, f64),
    dynamic_rates: (f64, f64),
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn pooled_mse(
    windows: &[SampleWindow],
    contexts: &[Vec<f64>],
    spec: &ForecasterSpec,
    horizon: usize,
) -> f64 {
    let mut preds = Vec::new();
    let mut truths = Vec::new();
    for (window, context) in windows.iter().zip(contexts) {
        preds.extend(forecast(spec, context, horizon).unwrap().values);
        truths.extend(window.truth.clone().unwrap());
    }
    forecast_metrics(&preds, &truths).unwrap().mse
}

fn golden_study() -> &'static GoldenStudy {
    static STUDY: OnceLock<GoldenStudy> = OnceLock::new();
    STUDY.get_or_init(|| {
        let scenario = golden_scenario();
        let horizon = scenario.horizon;
        let clean_contexts: Vec<Vec<f64>> =
            scenario.online.iter().map(|w| w.context.clone()).collect();
        let clean_mse = pooled_mse(&scenario.online, &clean_contexts, &scenario.spec, horizon);

        let methods: [(&'static str, AttackMethod); 4] = [
            ("fgsm", AttackMethod::Fgsm),
            ("bim", AttackMethod::Bim),
            ("pgd", AttackMethod::Pgd),
            ("dga", AttackMethod::Dga),
        ];
        let mut adv_mse = BTreeMap::new();
        let mut loss_reductions = BTreeMap::new();
        let mut attack_results = BTreeMap::new();
        for (name, method) in methods {
            let cfg = golden_attack_config(method);
            let results = attack_windows(&scenario.online, &scenario.spec, &cfg, horizon).unwrap();
            let contexts: Vec<Vec<f64>> =
                results.iter().map(|r| r.perturbed_context.clone()).collect();
            adv_mse.insert(
                name,
                pooled_mse(&scenario.online, &contexts, &scenario.spec, horizon),
            );
            let reductions = scenario
                .online
                .iter()
                .zip(&contexts)
                .map(|(w, ctx)| {
                    target_loss(&scenario.spec, &w.context, horizon, 0.0).unwrap()
                        - target_loss(&scenario.spec, ctx, horizon, 0.0).unwrap()
                })
                .collect();
            loss_reductions.insert(name, reductions);
            attack_results.insert(name, results);
        }

        // Detection study against the PGD population.
        let pipeline = ScoringPipeline::new(
            &scenario.spec,
            &scenario.plan,
            Metric::Pearson,
            horizon,
        );
        let cal_sims: Vec<f64> = score_windows(&scenario.calibration, &pipeline)
            .unwrap()
            .iter()
            .map(|s| s.score)
            .collect();
        let cal_set = CalibrationSet::new(cal_sims).unwrap();
        let adv_windows: Vec<SampleWindow> = scenario
            .online
            .iter()
            .zip(&attack_results["pgd"])
            .map(|(w, r)| SampleWindow {
                context: r.perturbed_context.clone(),
                truth: w.truth.clone(),
                origin_index: w.origin_index,
            })
            .collect();
        let clean_sims: Vec<f64> = score_windows(&scenario.online, &pipeline)
            .unwrap()
            .iter()
            .map(|s| s.score)
            .collect();
        let adv_sims: Vec<f64> = score_windows(&adv_windows, &pipeline)
            .unwrap()
            .iter()
            .map(|s| s.score)
            .collect();

        let mut fixed =
            ThresholdModel::calibrate(&cal_set, Estimator::OrderStatistic, 0.01, false, None)
                .unwrap();
        let threshold = fixed.threshold;
        let clean_verdicts: Vec<Verdict> = scenario
            .online
            .iter()
            .enumerate()
            .map(|(i, w)| detect(i, w, &pipeline, &mut fixed).unwrap())
            .collect();
        let adv_verdicts: Vec<Verdict> = adv_windows
            .iter()
            .enumerate()
            .map(|(i, w)| detect(i, w, &pipeline, &mut fixed).unwrap())
            .collect();
        let fixed_report = evaluate(&clean_verdicts, &adv_verdicts).unwrap();

        // Dynamic pass over the same interleaved online stream.
        let mut dynamic =
            ThresholdModel::calibrate(&cal_set, Estimator::OrderStatistic, 0.01, true, None)
                .unwrap();
        let mut clean_dynamic = Vec::new();
        let mut adv_dynamic = Vec::new();
        for (i, (clean, adv)) in scenario.online.iter().zip(&adv_windows).enumerate() {
            clean_dynamic.push(detect(i, clean, &pipeline, &mut dynamic).unwrap());
            adv_dynamic.push(detect(i, adv, &pipeline, &mut dynamic).unwrap());
        }
        let dynamic_report = evaluate(&clean_dynamic, &adv_dynamic).unwrap();

        GoldenStudy {
            scenario,
            clean_mse,
            adv_mse,
            loss_reductions,
            attack_results,
            threshold,
            mean_clean_sim: mean(&clean_sims),
            mean_adv_sim: mean(&adv_sims),
            fixed_rates: (fixed_report.frr, fixed_report.far),
            dynamic_rates: (dynamic_report.frr, dynamic_report.far),
        }
    })
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_01_exact_frr_calibration() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for trial in 0..1000 {
        let n = rng.random_range(10..=500);
        let frr = ((trial % 20) + 1) as f64 * 0.01; // 0.01 ..= 0.20
        let mut values: Vec<f64> = (0..n)
            .map(|i| i as f64 + rng.random_range(0.0..0.4))
            .collect();
        for i in (1..values.len()).rev() {
            values.swap(i, rng.random_range(0..=i));
        }
        let set = CalibrationSet::new(values.clone()).unwrap();
        let threshold = order_statistic_threshold(&set, frr).unwrap();
        let below = values.iter().filter(|&&v| v < threshold).count();
        let expected = (frr * n as f64).floor() as usize;
        assert_eq!(below, expected, "trial {trial}: n={n}, frr={frr}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("[PASS] criterion 1: exact FRR calibration over 1000 randomized sets in {elapsed:?}");
}

#[test]
fn criterion_02_similarity_oracle_equivalence() {
    fn naive_pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let sa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>().sqrt();
        let sb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>().sqrt();
        cov / (sa * sb)
    }
    fn naive_distance_sim(a: &[f64], b: &[f64], manhattan: bool) -> f64 {
        let d = if manhattan {
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
        } else {
            a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
        };
        1.0 / (1.0 + d)
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    for _ in 0..1000 {
        let n = rng.random_range(2..32);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        assert!((pearson(&a, &b).unwrap() - naive_pearson(&a, &b)).abs() <= 1e-12);
        assert!(
            (distance_similarity(&a, &b, Metric::Euclidean).unwrap()
                - naive_distance_sim(&a, &b, false))
            .abs()
                <= 1e-12
        );
        assert!(
            (distance_similarity(&a, &b, Metric::Manhattan).unwrap()
                - naive_distance_sim(&a, &b, true))
            .abs()
                <= 1e-12
        );
    }
    let spec_pair = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
    assert!((spec_pair - 0.98198).abs() <= 1e-5, "got {spec_pair}");
    println!("[PASS] criterion 2: similarity metrics match naive oracles within 1e-12 on 1000 pairs");
}

#[test]
fn criterion_03_gaussian_quantile() {
    // Sample mean 0.9, sample std 0.02.
    let cal = CalibrationSet::new(vec![0.88, 0.90, 0.92]).unwrap();
    let threshold = gaussian_threshold(&cal, 0.01).unwrap();
    assert!(
        (threshold - 0.853473).abs() <= 1e-4,
        "threshold {threshold}"
    );

    let mut grid = vec![1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2];
    grid.extend((1..=50).map(|i| i as f64 * 0.01));
    for p in grid {
        let residual = (phi(phi_inv(p)) - p).abs();
        assert!(residual <= 1e-8, "residual {residual} at p={p}");
    }
    println!("[PASS] criterion 3: gaussian quantile 0.853473 +- 1e-4 and CDF round-trip <= 1e-8");
}

#[test]
fn criterion_04_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    for trial in 0..100 {
        let lag_order = rng.random_range(3..9);
        let spec = ForecasterSpec::RandomFeature {
            seed: 5000 + trial,
            features: rng.random_range(4..24),
            lag_order,
        };
        let len = rng.random_range(lag_order..3 * lag_order + 4);
        let context: Vec<f64> = (0..len).map(|_| rng.random_range(-2.0..2.0)).collect();
        let horizon = rng.random_range(1..6);
        let target = rng.random_range(-1.0..1.0);

        let analytic = loss_gradient(&spec, &context, horizon, target).unwrap();
        let h = 1e-5;
        let numeric: Vec<f64> = (0..context.len())
            .map(|j| {
                let mut plus = context.clone();
                let mut minus = context.clone();
                plus[j] += h;
                minus[j] -= h;
                (target_loss(&spec, &plus, horizon, target).unwrap()
                    - target_loss(&spec, &minus, horizon, target).unwrap())
                    / (2.0 * h)
            })
            .collect();
        let diff = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n) * (a - n))
            .sum::<f64>()
            .sqrt();
        let scale = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
        assert!(
            diff <= 1e-4 * scale.max(1e-8),
            "trial {trial}: relative error {}",
            diff / scale.max(1e-8)
        );
    }
    println!("[PASS] criterion 4: analytic gradients match central differences within 1e-4 on 100 contexts");
}

#[test]
fn criterion_05_attack_contracts() {
    // Ball constraint on every method over golden-scenario windows.
    let study = golden_study();
    for (name, results) in &study.attack_results {
        for (i, result) in results.iter().enumerate() {
            assert!(
                result.linf <= 0.2 + 1e-9,
                "{name} window {i}: linf {}",
                result.linf
            );
        }
    }

    // FGSM on the toy mean forecaster moves [1, 1] to exactly [0.8, 0.8].
    let toy = ForecasterSpec::FixedLinear {
        weights: vec![0.5, 0.5],
    };
    let window = SampleWindow {
        context: vec![1.0, 1.0],
        truth: None,
        origin_index: 0,
    };
    let cfg = AttackConfig {
        epsilon: 0.2,
        ..AttackConfig::new(AttackMethod::Fgsm)
    };
    let result = fgsm(&window, &toy, &cfg, 1).unwrap();
    assert_eq!(result.perturbed_context, vec![0.8, 0.8]);

    // Sparse runs leave non-mask coordinates bit-identical.
    let scenario = &study.scenario;
    let target = &scenario.online[0];
    for method in [
        AttackMethod::Fgsm,
        AttackMethod::Bim,
        AttackMethod::Pgd,
        AttackMethod::Dga,
    ] {
        let cfg = AttackConfig {
            sparsity: Some(0.4),
            ..golden_attack_config(method)
        };
        let result = run_attack(target, &scenario.spec, &cfg, scenario.horizon).unwrap();
        let mask = result.mask.expect("sparse run produces a mask");
        assert!(result.linf <= 0.2 + 1e-9);
        for j in 0..target.context.len() {
            if !mask.contains(&j) {
                assert_eq!(
                    result.perturbed_context[j].to_bits(),
                    target.context[j].to_bits(),
                    "{method:?}: unmasked coordinate {j} moved"
                );
            }
        }
    }
    println!("[PASS] criterion 5: ball constraints, exact FGSM toy step, sparse masking contracts");
}

#[test]
fn criterion_06_efficacy_direction_and_golden_margins() {
    let study = golden_study();
    assert_eq!(study.clean_mse, GOLDEN_CLEAN_MSE, "clean MSE drifted");
    for (name, golden) in GOLDEN_MSE {
        let got = study.adv_mse[name];
        assert!(
            got > study.clean_mse,
            "{name}: adversarial MSE {got} not above clean {}",
            study.clean_mse
        );
        assert_eq!(got, golden, "{name}: adversarial MSE drifted");
    }
    for (name, golden) in GOLDEN_MEAN_LOSS_RED {
        let got = mean(&study.loss_reductions[name]);
        assert_eq!(got, golden, "{name}: mean loss reduction drifted");
    }

    let wins = |a: &str, b: &str| {
        study.loss_reductions[a]
            .iter()
            .zip(&study.loss_reductions[b])
            .filter(|(x, y)| x >= y)
            .count()
    };
    let pgd_ge_bim = wins("pgd", "bim");
    let bim_ge_fgsm = wins("bim", "fgsm");
    assert!(pgd_ge_bim >= 80, "pgd >= bim only on {pgd_ge_bim}/100");
    assert!(bim_ge_fgsm >= 80, "bim >= fgsm only on {bim_ge_fgsm}/100");
    assert_eq!(pgd_ge_bim, GOLDEN_PGD_GE_BIM);
    assert_eq!(bim_ge_fgsm, GOLDEN_BIM_GE_FGSM);
    println!(
        "[PASS] criterion 6: every attack raises mean MSE ({:.4} clean); ordering pgd>=bim on {pgd_ge_bim}/100, bim>=fgsm on {bim_ge_fgsm}/100; margins bit-exact",
        study.clean_mse
    );
}

#[test]
fn criterion_07_detection_separation_and_golden_rates() {
    let study = golden_study();
    assert!(
        study.mean_adv_sim < study.mean_clean_sim,
        "no separation: adv {} vs clean {}",
        study.mean_adv_sim,
        study.mean_clean_sim
    );
    assert_eq!(study.mean_clean_sim, GOLDEN_MEAN_CLEAN_SIM);
    assert_eq!(study.mean_adv_sim, GOLDEN_MEAN_ADV_SIM);
    assert_eq!(study.threshold, GOLDEN_THRESHOLD);
    assert_eq!(study.fixed_rates, (GOLDEN_FIXED_FRR, GOLDEN_FIXED_FAR));
    assert_eq!(study.dynamic_rates, (GOLDEN_DYNAMIC_FRR, GOLDEN_DYNAMIC_FAR));
    assert!(
        study.dynamic_rates.1 <= study.fixed_rates.1,
        "dynamic FAR {} above fixed FAR {}",
        study.dynamic_rates.1,
        study.fixed_rates.1
    );
    println!(
        "[PASS] criterion 7: separation {:.4} vs {:.4}; fixed FRR/FAR {:.0}%/{:.0}%, dynamic {:.0}%/{:.0}% reproduced exactly",
        study.mean_clean_sim,
        study.mean_adv_sim,
        study.fixed_rates.0 * 100.0,
        study.fixed_rates.1 * 100.0,
        study.dynamic_rates.0 * 100.0,
        study.dynamic_rates.1 * 100.0
    );
}

#[test]
fn criterion_08_frr_far_arithmetic() {
    let verdict = |id: usize, adversarial: bool| Verdict {
        window_id: id,
        score: if adversarial { 0.5 } else { 0.99 },
        threshold: 0.915,
        adversarial,
        pair_scores: PairwiseScores {
            metric: Metric::Pearson,
            scores: vec![0.9],
        },
        degenerate_pairs: Vec::new(),
    };
    // 66 clean with 1 flagged; 66 adversarial with 2 passed.
    let clean: Vec<Verdict> = (0..66).map(|i| verdict(i, i == 0)).collect();
    let adversarial: Vec<Verdict> = (0..66).map(|i| verdict(100 + i, i >= 2)).collect();
    let report = evaluate(&clean, &adversarial).unwrap();
    assert_eq!(report.counts.clean_flagged, 1);
    assert_eq!(report.counts.adv_passed, 2);
    assert_eq!(report.frr_percent(), 1.5);
    assert_eq!(report.far_percent(), 3.0);
    println!("[PASS] criterion 8: 1/66 and 2/66 round to exactly 1.5% FRR and 3.0% FAR");
}

#[test]
fn criterion_09_end_to_end_benign_stability() {
    // Noiseless period-4 series; stride-2 offsets {1, 5} are congruent mod 4,
    // so both variants of every window are identical and any deterministic
    // forecaster yields identical forecasts.
    let pattern = [1.0, 5.0, 2.0, 7.0];
    let values: Vec<f64> = (0..200).map(|i| pattern[i % 4]).collect();
    let series = TimeSeries::new("periodic", values, "1h").unwrap();
    let windows = make_windows(&series, 16, 4, 20).unwrap();
    assert!(windows.len() >= 9);

    let spec = ForecasterSpec::SeasonalNaive { period: 2 };
    let plan = stride_plan(16, 2, &[1, 5]).unwrap();
    for metric in [Metric::Euclidean, Metric::Manhattan] {
        let pipeline = ScoringPipeline::new(&spec, &plan, metric, 4);
        let scored = score_windows(&windows, &pipeline).unwrap();
        for (i, s) in scored.iter().enumerate() {
            assert_eq!(s.score, 1.0, "window {i} under {metric:?}");
        }
        for threshold in [0.0, 0.5, 0.99, 0.9999999] {
            let cal = CalibrationSet::new(vec![1.0, 1.0]).unwrap();
            let mut model =
                ThresholdModel::calibrate(&cal, Estimator::OrderStatistic, 0.0, false, None)
                    .unwrap();
            model.threshold = threshold;
            for (i, window) in windows.iter().enumerate() {
                let verdict = detect(i, window, &pipeline, &mut model).unwrap();
                assert!(!verdict.adversarial, "flagged at threshold {threshold}");
            }
        }
    }
    println!("[PASS] criterion 9: periodic series scores exactly 1.0 everywhere, zero flags below 1");
}

#[test]
fn criterion_10_cli_determinism() {
    let binary = env!("CARGO_BIN_EXE_ilid");
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // Small seeded dataset written once and shared by both runs.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut csv = String::from("t,v\n");
    for i in 0..700 {
        let v = (2.0 * std::f64::consts::PI * i as f64 / 48.0).sin()
            + rng.random_range(-0.02..0.02);
        csv.push_str(&format!("{i},{v}\n"));
    }
    let data_path = root.join("data.csv");
    std::fs::write(&data_path, csv).unwrap();

    let config = serde_json::json!({
        "dataset": {
            "csv": data_path,
            "column": "v",
            "context_len": 16,
            "horizon": 4,
            "normalize": true
        },
        "forecaster": {"kind": "random_feature", "seed": 5, "features": 8, "lag_order": 8},
        "subsample": {"kind": "stride", "stride": 2, "offsets": [0, 1]},
        "similarity": {"metric": "pearson"},
        "threshold": {"estimator": "order_statistic", "preset_frr": 0.05, "dynamic": true},
        "attack": {"method": "pgd", "epsilon": 0.2, "steps": 5, "seed": 9},
        "seed": 9,
        "split": {"calibration_fraction": 0.5}
    });
    let config_path = root.join("config.json");
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();

    let run_all = |out: &Path| {
        for args in [
            vec![
                "calibrate",
                "--config",
                config_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ],
            vec![
                "attack",
                "--config",
                config_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ],
            vec![
                "evaluate",
                "--config",
                config_path.to_str().unwrap(),
                "--model",
                out.join("model.json").to_str().unwrap(),
                "--adv",
                out.join("adversarial_windows.csv").to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ],
        ] {
            let output = Command::new(binary).args(&args).output().unwrap();
            assert!(
                output.status.success(),
                "{args:?} failed: {}",
                String::from_utf8_lossy(&output.stderr)
            );
        }
    };

    let out_a = root.join("run_a");
    let out_b = root.join("run_b");
    run_all(&out_a);
    run_all(&out_b);

    let mut compared = 0;
    for name in [
        "model.json",
        "adversarial_windows.csv",
        "attack.csv",
        "verdicts_clean.csv",
        "verdicts_adv.csv",
        "similarities_clean.csv",
        "similarities_adv.csv",
        "histogram.csv",
        "evaluation.json",
    ] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        compared += 1;
    }
    assert_eq!(compared, 9);
    println!("[PASS] criterion 10: two identical CLI runs produced 9 byte-identical report files");
}
