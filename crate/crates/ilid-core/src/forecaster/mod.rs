//! The pluggable variable-length forecasting interface.
//!
//! Every forecaster maps a context of any length L >= min_context to a
//! horizon-length prediction. Three deterministic reference forecasters cover
//! desk-scale validation:
//!
//! - `seasonal_naive`: repeats the last period verbatim
//! - `fixed_linear`: autoregressive with fixed weights, recursive multi-step
//! - `random_feature`: y = v . tanh(W u + b) over the last p lags with W, b, v
//!   drawn once from a seed; a nonlinear stand-in that is sensitive to
//!   high-frequency input structure, so full-sequence perturbations do not
//!   trivially transfer to subsamples
//!
//! `fixed_linear` and `random_feature` also expose an analytic loss gradient
//! for white-box attacks. The `remote` kind forwards to an HTTP forecasting
//! service (see [`remote`]).

pub mod remote;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("context of length {got} is below the forecaster minimum {needed}")]
    ContextTooShort { needed: usize, got: usize },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("invalid forecaster spec: {0}")]
    InvalidSpec(String),
    #[error("{kind} exposes no loss gradient")]
    NotDifferentiable { kind: &'static str },
    #[error("forecast produced a non-finite value at step {step}")]
    NonFinite { step: usize },
    #[error("remote transport failure: {0}")]
    RemoteTransport(String),
    #[error("remote endpoint returned HTTP status {status}")]
    RemoteStatus { status: u16 },
    #[error("remote payload malformed: {0}")]
    RemotePayload(String),
    #[error("remote forecast horizon mismatch: requested {requested}, got {got}")]
    HorizonMismatch { requested: usize, got: usize },
}

/// A horizon-length prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub values: Vec<f64>,
}

impl Forecast {
    fn checked(values: Vec<f64>) -> Result<Self, ForecastError> {
        if let Some(step) = values.iter().position(|v| !v.is_finite()) {
            return Err(ForecastError::NonFinite { step });
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Forecaster selection plus its parameters. Reference kinds are pure
/// functions of (spec, context, horizon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForecasterSpec {
    /// Repeats the last `period` observations cyclically.
    SeasonalNaive { period: usize },
    /// One-step prediction sum(weights[j] * lag[j]) over the last
    /// `weights.len()` values, oldest lag first; multi-step recursion feeds
    /// predictions back as lags.
    FixedLinear { weights: Vec<f64> },
    /// Random-feature regressor over the last `lag_order` values with
    /// `features` tanh units; weights drawn once from `seed`.
    RandomFeature {
        seed: u64,
        features: usize,
        lag_order: usize,
    },
    /// HTTP adapter; see [`remote::remote_forecast`].
    Remote {
        endpoint: String,
        model: String,
        #[serde(default = "default_min_context")]
        min_context: usize,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
        #[serde(default)]
        retries: u32,
        #[serde(default = "default_backoff_ms")]
        retry_backoff_ms: u64,
    },
}

fn default_min_context() -> usize {
    1
}

fn default_timeout_ms() -> u64 {
    10_000
}

fn default_backoff_ms() -> u64 {
    100
}

impl ForecasterSpec {
    /// Shortest context the forecaster accepts.
    pub fn min_context(&self) -> usize {
        match self {
            ForecasterSpec::SeasonalNaive { period } => *period,
            ForecasterSpec::FixedLinear { weights } => weights.len(),
            ForecasterSpec::RandomFeature { lag_order, .. } => *lag_order,
            ForecasterSpec::Remote { min_context, .. } => *min_context,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ForecasterSpec::SeasonalNaive { .. } => "seasonal_naive",
            ForecasterSpec::FixedLinear { .. } => "fixed_linear",
            ForecasterSpec::RandomFeature { .. } => "random_feature",
            ForecasterSpec::Remote { .. } => "remote",
        }
    }

    /// True for kinds with an analytic loss gradient.
    pub fn differentiable(&self) -> bool {
        matches!(
            self,
            ForecasterSpec::FixedLinear { .. } | ForecasterSpec::RandomFeature { .. }
        )
    }

    fn validate(&self) -> Result<(), ForecastError> {
        match self {
            ForecasterSpec::SeasonalNaive { period } => {
                if *period == 0 {
                    return Err(ForecastError::InvalidSpec("period must be >= 1".into()));
                }
            }
            ForecasterSpec::FixedLinear { weights } => {
                if weights.is_empty() {
                    return Err(ForecastError::InvalidSpec("weights must be non-empty".into()));
                }
                if weights.iter().any(|w| !w.is_finite()) {
                    return Err(ForecastError::InvalidSpec("weights must be finite".into()));
                }
            }
            ForecasterSpec::RandomFeature {
                features,
                lag_order,
                ..
            } => {
                if *features == 0 || *lag_order == 0 {
                    return Err(ForecastError::InvalidSpec(
                        "features and lag_order must be >= 1".into(),
                    ));
                }
            }
            ForecasterSpec::Remote { min_context, .. } => {
                if *min_context == 0 {
                    return Err(ForecastError::InvalidSpec("min_context must be >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Query-only view of a forecaster. Black-box attacks are written against
/// this trait, so the type system guarantees they consume nothing but
/// forecasts.
pub trait QueryForecaster {
    fn query(&mut self, context: &[f64], horizon: usize) -> Result<Forecast, ForecastError>;
}

impl QueryForecaster for &ForecasterSpec {
    fn query(&mut self, context: &[f64], horizon: usize) -> Result<Forecast, ForecastError> {
        forecast(self, context, horizon)
    }
}

/// Predicts `horizon` future values from a context of any length
/// `>= spec.min_context()`. Deterministic for the reference kinds.
pub fn forecast(
    spec: &ForecasterSpec,
    context: &[f64],
    horizon: usize,
) -> Result<Forecast, ForecastError> {
    spec.validate()?;
    if horizon == 0 {
        return Err(ForecastError::ZeroHorizon);
    }
    let needed = spec.min_context();
    if context.len() < needed {
        return Err(ForecastError::ContextTooShort {
            needed,
            got: context.len(),
        });
    }

    match spec {
        ForecasterSpec::SeasonalNaive { period } => {
            let len = context.len();
            let values = (0..horizon)
                .map(|h| context[len - period + (h % period)])
                .collect();
            Forecast::checked(values)
        }
        ForecasterSpec::FixedLinear { weights } => {
            let mut extended = context.to_vec();
            for _ in 0..horizon {
                let window = &extended[extended.len() - weights.len()..];
                let next: f64 = weights.iter().zip(window).map(|(w, x)| w * x).sum();
                extended.push(next);
            }
            Forecast::checked(extended[context.len()..].to_vec())
        }
        ForecasterSpec::RandomFeature {
            seed,
            features,
            lag_order,
        } => {
            let params = RandomFeatureParams::from_seed(*seed, *features, *lag_order);
            let mut extended = context.to_vec();
            for _ in 0..horizon {
                let window = &extended[extended.len() - lag_order..];
                let (next, _) = params.step(window);
                extended.push(next);
            }
            Forecast::checked(extended[context.len()..].to_vec())
        }
        ForecasterSpec::Remote {
            endpoint,
            model,
            timeout_ms,
            retries,
            retry_backoff_ms,
            ..
        } => remote::remote_forecast_with_retries(
            endpoint,
            model,
            context,
            horizon,
            std::time::Duration::from_millis(*timeout_ms),
            *retries,
            std::time::Duration::from_millis(*retry_backoff_ms),
        ),
    }
}

/// Targeted loss L(x) = mean over the horizon of (forecast(x)_h - target)^2.
pub fn target_loss(
    spec: &ForecasterSpec,
    context: &[f64],
    horizon: usize,
    target: f64,
) -> Result<f64, ForecastError> {
    let prediction = forecast(spec, context, horizon)?;
    Ok(prediction
        .values
        .iter()
        .map(|y| (y - target) * (y - target))
        .sum::<f64>()
        / horizon as f64)
}

/// Analytic gradient of [`target_loss`] with respect to the context,
/// propagated through the recursive multi-step loop by reverse accumulation.
///
/// Only `fixed_linear` and `random_feature` are differentiable; other kinds
/// return a capability error.
pub fn loss_gradient(
    spec: &ForecasterSpec,
    context: &[f64],
    horizon: usize,
    target: f64,
) -> Result<Vec<f64>, ForecastError> {
    spec.validate()?;
    if horizon == 0 {
        return Err(ForecastError::ZeroHorizon);
    }
    let p = spec.min_context();
    if context.len() < p {
        return Err(ForecastError::ContextTooShort {
            needed: p,
            got: context.len(),
        });
    }

    // Forward pass: extend the sequence step by step and keep whatever the
    // backward pass needs to rebuild each step's local Jacobian.
    let len = context.len();
    let mut extended = context.to_vec();
    let mut step_jacobians: Vec<Vec<f64>> = Vec::with_capacity(horizon);
    match spec {
        ForecasterSpec::FixedLinear { weights } => {
            for _ in 0..horizon {
                let window = &extended[extended.len() - p..];
                let next: f64 = weights.iter().zip(window).map(|(w, x)| w * x).sum();
                extended.push(next);
                step_jacobians.push(weights.clone());
            }
        }
        ForecasterSpec::RandomFeature {
            seed,
            features,
            lag_order,
        } => {
            let params = RandomFeatureParams::from_seed(*seed, *features, *lag_order);
            for _ in 0..horizon {
                let window = &extended[extended.len() - p..];
                let (next, activations) = params.step(window);
                extended.push(next);
                step_jacobians.push(params.input_jacobian(&activations));
            }
        }
        other => {
            return Err(ForecastError::NotDifferentiable {
                kind: other.kind_name(),
            });
        }
    }

    // Reverse pass. adjoint[q] is dL/d(extended[q]); predictions start from
    // the loss term, then each step scatters its adjoint onto the p inputs it
    // consumed (which may themselves be earlier predictions).
    let mut adjoint = vec![0.0; len + horizon];
    for h in 0..horizon {
        adjoint[len + h] = 2.0 * (extended[len + h] - target) / horizon as f64;
    }
    for q in (len..len + horizon).rev() {
        let jac = &step_jacobians[q - len];
        let upstream = adjoint[q];
        for (j, dydu) in jac.iter().enumerate() {
            adjoint[q - p + j] += dydu * upstream;
        }
    }
    adjoint.truncate(len);
    Ok(adjoint)
}

/// Frozen random-feature parameters: y = v . tanh(W u + b).
struct RandomFeatureParams {
    /// features x lag_order, row-major.
    w: Vec<f64>,
    b: Vec<f64>,
    v: Vec<f64>,
    features: usize,
    lag_order: usize,
}

/// Relative high-frequency spread of the input rows around the averaging
/// component.
const RF_W_SPREAD: f64 = 4.0;
/// Bias std; spreads the tanh operating points across units.
const RF_B_STD: f64 = 0.3;
/// Readout gain; roughly undoes tanh shrinkage so the model tracks the local
/// level of z-scored data.
const RF_GAIN: f64 = 1.3;
/// Relative spread of the readout weights.
const RF_V_SPREAD: f64 = 0.5;

impl RandomFeatureParams {
    fn from_seed(seed: u64, features: usize, lag_order: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Each row is a unit-sum lag average plus seed-drawn high-frequency
        // structure. The averaging part makes the forecast follow the local
        // signal level; the spread part, pushed through tanh curvature, makes
        // the map react to the per-lag pattern of a perturbation rather than
        // just its mean.
        let w_level = 1.0 / lag_order as f64;
        let w = (0..features * lag_order)
            .map(|_| (1.0 + RF_W_SPREAD * rng.sample::<f64, _>(StandardNormal)) * w_level)
            .collect();
        let b = (0..features)
            .map(|_| rng.sample::<f64, _>(StandardNormal) * RF_B_STD)
            .collect();
        let v_level = RF_GAIN / features as f64;
        let v = (0..features)
            .map(|_| (1.0 + RF_V_SPREAD * rng.sample::<f64, _>(StandardNormal)) * v_level)
            .collect();
        Self {
            w,
            b,
            v,
            features,
            lag_order,
        }
    }

    /// One-step prediction and the tanh activations it used.
    fn step(&self, window: &[f64]) -> (f64, Vec<f64>) {
        debug_assert_eq!(window.len(), self.lag_order);
        let mut activations = Vec::with_capacity(self.features);
        let mut out = 0.0;
        for k in 0..self.features {
            let row = &self.w[k * self.lag_order..(k + 1) * self.lag_order];
            let pre: f64 = row.iter().zip(window).map(|(w, x)| w * x).sum::<f64>() + self.b[k];
            let z = pre.tanh();
            activations.push(z);
            out += self.v[k] * z;
        }
        (out, activations)
    }

    /// d(step output)/d(window[j]) given the stored activations.
    fn input_jacobian(&self, activations: &[f64]) -> Vec<f64> {
        (0..self.lag_order)
            .map(|j| {
                (0..self.features)
                    .map(|k| {
                        self.v[k]
                            * (1.0 - activations[k] * activations[k])
                            * self.w[k * self.lag_order + j]
                    })
                    .sum()
            })
            .collect()
    }
}
