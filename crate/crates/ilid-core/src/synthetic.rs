//! Bundled seeded benchmark: a sine-plus-noise series with a fixed
//! random-feature forecaster and an odd/even subsampling plan.
//!
//! Everything here is a pure function of the constants below, so golden
//! values recorded against this scenario reproduce bit-exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::attack::{AttackConfig, AttackMethod};
use crate::forecaster::ForecasterSpec;
use crate::series::{make_windows, znormalize, NormStats, SampleWindow, TimeSeries};
use crate::subsample::{stride_plan, SubsamplePlan};

/// Sine wave of the given period and amplitude with seeded Gaussian noise.
pub fn sine_with_noise(
    len: usize,
    period: f64,
    amplitude: f64,
    noise_std: f64,
    seed: u64,
) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_std).expect("valid std");
    let values = (0..len)
        .map(|i| {
            let phase = 2.0 * std::f64::consts::PI * i as f64 / period;
            amplitude * phase.sin() + noise.sample(&mut rng)
        })
        .collect();
    TimeSeries::new("synthetic", values, "1h").expect("finite by construction")
}

/// The benchmark scenario: 100 calibration windows and 100 online windows of
/// 64 context steps forecasting 8, z-scored with statistics taken from the
/// calibration half only.
pub struct GoldenScenario {
    pub calibration: Vec<SampleWindow>,
    pub online: Vec<SampleWindow>,
    pub spec: ForecasterSpec,
    pub plan: SubsamplePlan,
    pub stats: NormStats,
    pub context_len: usize,
    pub horizon: usize,
}

pub const GOLDEN_SERIES_SEED: u64 = 20240601;
pub const GOLDEN_FORECASTER_SEED: u64 = 42;
pub const GOLDEN_ATTACK_SEED: u64 = 1;
pub const GOLDEN_CONTEXT_LEN: usize = 64;
pub const GOLDEN_HORIZON: usize = 8;
pub const GOLDEN_WINDOWS_PER_SPLIT: usize = 100;
pub const GOLDEN_SINE_PERIOD: f64 = 192.0;
pub const GOLDEN_NOISE_STD: f64 = 0.01;

pub fn golden_scenario() -> GoldenScenario {
    let context_len = GOLDEN_CONTEXT_LEN;
    let horizon = GOLDEN_HORIZON;
    let stride = context_len + horizon;
    let total_windows = 2 * GOLDEN_WINDOWS_PER_SPLIT;
    let series = sine_with_noise(
        total_windows * stride,
        GOLDEN_SINE_PERIOD,
        1.0,
        GOLDEN_NOISE_STD,
        GOLDEN_SERIES_SEED,
    );

    // Normalization statistics come from the calibration half alone; the
    // online half must not leak into them.
    let calibration_values = &series.values[..GOLDEN_WINDOWS_PER_SPLIT * stride];
    let stats = NormStats::from_values(calibration_values).expect("non-constant");
    let normalized = znormalize(&series, stats).expect("std > 0");

    let mut windows = make_windows(&normalized, context_len, horizon, stride).expect("long enough");
    assert_eq!(windows.len(), total_windows);
    let online = windows.split_off(GOLDEN_WINDOWS_PER_SPLIT);

    GoldenScenario {
        calibration: windows,
        online,
        spec: ForecasterSpec::RandomFeature {
            seed: GOLDEN_FORECASTER_SEED,
            features: 16,
            lag_order: 16,
        },
        plan: stride_plan(context_len, 2, &[0, 1]).expect("valid plan"),
        stats,
        context_len,
        horizon,
    }
}

/// Attack settings used for golden runs: the standard 0.2 budget with enough
/// steps for the iterative methods to reach the ball boundary from any start.
pub fn golden_attack_config(method: AttackMethod) -> AttackConfig {
    AttackConfig {
        epsilon: 0.2,
        steps: 50,
        step_size: Some(0.012),
        seed: GOLDEN_ATTACK_SEED,
        ..AttackConfig::new(method)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_is_deterministic() {
        let a = golden_scenario();
        let b = golden_scenario();
        assert_eq!(a.calibration, b.calibration);
        assert_eq!(a.online, b.online);
        assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn scenario_shape() {
        let scenario = golden_scenario();
        assert_eq!(scenario.calibration.len(), 100);
        assert_eq!(scenario.online.len(), 100);
        assert_eq!(scenario.calibration[0].context.len(), 64);
        assert_eq!(scenario.calibration[0].truth.as_ref().unwrap().len(), 8);
        assert_eq!(scenario.plan.len(), 32);
    }

    #[test]
    fn noiseless_sine_is_periodic() {
        let series = sine_with_noise(96, 48.0, 1.0, 0.0, 7);
        for i in 0..48 {
            assert!((series.values[i] - series.values[i + 48]).abs() < 1e-9);
        }
    }
}
