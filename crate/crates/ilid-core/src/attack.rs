//! Adversarial window generation against a forecaster.
//!
//! All attacks are targeted: the loss is the mean squared distance between
//! the forecast and a constant target value (default 0), since an attacker
//! has no access to the true future values. Perturbations live in an
//! L-infinity ball of radius epsilon around the original context; there is no
//! additional data-range clipping because normalized series are unbounded.
//!
//! White-box methods (FGSM, BIM, PGD) consume the analytic loss gradient.
//! The black-box method estimates directional gradients from forecast queries
//! alone and is written against [`QueryForecaster`], so it cannot touch
//! gradient code by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forecaster::{loss_gradient, ForecastError, ForecasterSpec, QueryForecaster};
use crate::series::SampleWindow;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("invalid attack config: {0}")]
    Config(String),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error("black-box attack failed after {queries} queries: {source}")]
    QueryFailed {
        queries: usize,
        source: ForecastError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackMethod {
    Fgsm,
    Bim,
    Pgd,
    Dga,
    None,
}

impl AttackMethod {
    pub fn name(self) -> &'static str {
        match self {
            AttackMethod::Fgsm => "fgsm",
            AttackMethod::Bim => "bim",
            AttackMethod::Pgd => "pgd",
            AttackMethod::Dga => "dga",
            AttackMethod::None => "none",
        }
    }
}

/// How a sparse attack picks the timesteps it may perturb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsifyMode {
    /// Largest-magnitude entries of a gradient.
    TopkGradient,
    /// Seed-deterministic uniform choice.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub method: AttackMethod,
    /// L-infinity budget.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Per-step magnitude; defaults to epsilon / steps.
    #[serde(default)]
    pub step_size: Option<f64>,
    #[serde(default)]
    pub target: f64,
    /// Fraction of timesteps a sparse attack may touch.
    #[serde(default)]
    pub sparsity: Option<f64>,
    #[serde(default = "default_sparsify_mode")]
    pub sparsify_mode: SparsifyMode,
    #[serde(default)]
    pub seed: u64,
    /// Directions per step for the black-box gradient estimate.
    #[serde(default = "default_dga_directions")]
    pub dga_directions: usize,
    /// Probe length for the black-box finite differences.
    #[serde(default = "default_dga_delta")]
    pub dga_delta: f64,
}

fn default_epsilon() -> f64 {
    0.2
}

fn default_steps() -> usize {
    10
}

fn default_sparsify_mode() -> SparsifyMode {
    SparsifyMode::TopkGradient
}

fn default_dga_directions() -> usize {
    16
}

fn default_dga_delta() -> f64 {
    0.01
}

impl AttackConfig {
    pub fn new(method: AttackMethod) -> Self {
        Self {
            method,
            epsilon: default_epsilon(),
            steps: default_steps(),
            step_size: None,
            target: 0.0,
            sparsity: None,
            sparsify_mode: default_sparsify_mode(),
            seed: 0,
            dga_directions: default_dga_directions(),
            dga_delta: default_dga_delta(),
        }
    }

    pub fn resolved_step_size(&self) -> f64 {
        self.step_size.unwrap_or(self.epsilon / self.steps as f64)
    }

    pub fn validate(&self) -> Result<(), AttackError> {
        if self.epsilon <= 0.0 {
            return Err(AttackError::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.steps == 0 {
            return Err(AttackError::Config("steps must be at least 1".into()));
        }
        if let Some(alpha) = self.step_size {
            if alpha <= 0.0 {
                return Err(AttackError::Config(format!(
                    "step_size must be positive, got {alpha}"
                )));
            }
        }
        if let Some(fraction) = self.sparsity {
            if !(0.0 < fraction && fraction < 1.0) {
                return Err(AttackError::Config(format!(
                    "sparsity must be in (0, 1), got {fraction}"
                )));
            }
        }
        if self.dga_directions == 0 {
            return Err(AttackError::Config("dga_directions must be >= 1".into()));
        }
        if self.dga_delta <= 0.0 {
            return Err(AttackError::Config("dga_delta must be positive".into()));
        }
        Ok(())
    }
}

/// A perturbed context plus the budget and query accounting for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub perturbed_context: Vec<f64>,
    /// Realized max |x' - x|.
    pub linf: f64,
    /// Forecast calls consumed (0 for white-box methods).
    pub queries: usize,
    /// Perturbed index set for sparse attacks.
    pub mask: Option<Vec<usize>>,
}

impl AttackResult {
    fn from_perturbed(
        original: &[f64],
        perturbed: Vec<f64>,
        queries: usize,
        mask: Option<Vec<usize>>,
    ) -> Self {
        let linf = original
            .iter()
            .zip(&perturbed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Self {
            perturbed_context: perturbed,
            linf,
            queries,
            mask,
        }
    }
}

/// Selects the timesteps a sparse attack may perturb: the
/// `round(fraction * T)` largest-magnitude gradient entries, ties broken by
/// lower index. Returned sorted ascending.
pub fn sparsify_topk(gradient: &[f64], fraction: f64) -> Result<Vec<usize>, AttackError> {
    let size = mask_size(gradient.len(), fraction)?;
    let mut order: Vec<usize> = (0..gradient.len()).collect();
    order.sort_by(|&a, &b| {
        gradient[b]
            .abs()
            .partial_cmp(&gradient[a].abs())
            .expect("finite gradient")
            .then(a.cmp(&b))
    });
    let mut mask = order[..size].to_vec();
    mask.sort_unstable();
    Ok(mask)
}

/// Seed-deterministic uniform mask of size `round(fraction * T)`, sorted
/// ascending.
pub fn sparsify_random(t: usize, fraction: f64, seed: u64) -> Result<Vec<usize>, AttackError> {
    let size = mask_size(t, fraction)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = rand::seq::index::sample(&mut rng, t, size).into_vec();
    mask.sort_unstable();
    Ok(mask)
}

fn mask_size(t: usize, fraction: f64) -> Result<usize, AttackError> {
    if !(0.0 < fraction && fraction < 1.0) {
        return Err(AttackError::Config(format!(
            "sparsity must be in (0, 1), got {fraction}"
        )));
    }
    let size = (fraction * t as f64).round() as usize;
    if size == 0 {
        return Err(AttackError::Config(format!(
            "sparsity {fraction} selects no timesteps for T={t}"
        )));
    }
    Ok(size)
}

fn mask_flags(t: usize, mask: Option<&[usize]>) -> Vec<bool> {
    match mask {
        None => vec![true; t],
        Some(indices) => {
            let mut flags = vec![false; t];
            for &i in indices {
                flags[i] = true;
            }
            flags
        }
    }
}

/// One signed step with projection back into the epsilon ball around `origin`.
/// Coordinates outside the mask are restored to the origin bit-exactly.
fn signed_step_project(
    current: &mut [f64],
    origin: &[f64],
    gradient: &[f64],
    alpha: f64,
    epsilon: f64,
    allowed: &[bool],
) {
    for j in 0..current.len() {
        if !allowed[j] {
            current[j] = origin[j];
            continue;
        }
        let stepped = current[j] - alpha * sign(gradient[j]);
        current[j] = stepped.clamp(origin[j] - epsilon, origin[j] + epsilon);
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn white_box_mask(
    window: &SampleWindow,
    spec: &ForecasterSpec,
    cfg: &AttackConfig,
    horizon: usize,
) -> Result<Option<Vec<usize>>, AttackError> {
    match cfg.sparsity {
        None => Ok(None),
        Some(fraction) => {
            let mask = match cfg.sparsify_mode {
                SparsifyMode::TopkGradient => {
                    let grad = loss_gradient(spec, &window.context, horizon, cfg.target)?;
                    sparsify_topk(&grad, fraction)?
                }
                SparsifyMode::Random => {
                    sparsify_random(window.context.len(), fraction, cfg.seed)?
                }
            };
            Ok(Some(mask))
        }
    }
}

/// Fast gradient sign method: one full-budget signed step.
pub fn fgsm(
    window: &SampleWindow,
    spec: &ForecasterSpec,
    cfg: &AttackConfig,
    horizon: usize,
) -> Result<AttackResult, AttackError> {
    cfg.validate()?;
    let mask = white_box_mask(window, spec, cfg, horizon)?;
    let allowed = mask_flags(window.context.len(), mask.as_deref());
    let gradient = loss_gradient(spec, &window.context, horizon, cfg.target)?;
    let mut perturbed = window.context.clone();
    signed_step_project(
        &mut perturbed,
        &window.context,
        &gradient,
        cfg.epsilon,
        cfg.epsilon,
        &allowed,
    );
    Ok(AttackResult::from_perturbed(
        &window.context,
        perturbed,
        0,
        mask,
    ))
}

/// Basic iterative method: repeated signed steps of size `step_size` with
/// projection into the epsilon ball.
pub fn bim(
    window: &SampleWindow,
    spec: &ForecasterSpec,
    cfg: &AttackConfig,
    horizon: usize,
) -> Result<AttackResult, AttackError> {
    cfg.validate()?;
    let mask = white_box_mask(window, spec, cfg, horizon)?;
    let perturbed = iterate_white_box(window, spec, cfg, horizon, mask.as_deref(), None)?;
    Ok(AttackResult::from_perturbed(
        &window.context,
        perturbed,
        0,
        mask,
    ))
}

/// Projected gradient descent: BIM preceded by a seeded uniform start inside
/// the epsilon ball.
pub fn pgd(
    window: &SampleWindow,
    spec: &ForecasterSpec,
    cfg: &AttackConfig,
    horizon: usize,
) -> Result<AttackResult, AttackError> {
    cfg.validate()?;
    let mask = white_box_mask(window, spec, cfg, horizon)?;
    let allowed = mask_flags(window.context.len(), mask.as_deref());
    let start = uniform_ball_start(&window.context, cfg.epsilon, cfg.seed, &allowed);
    let perturbed = iterate_white_box(window, spec, cfg, horizon, mask.as_deref(), Some(start))?;
    Ok(AttackResult::from_perturbed(
        &window.context,
        perturbed,
        0,
        mask,
    ))
}

fn uniform_ball_start(origin: &[f64], epsilon: f64, seed: u64, allowed: &[bool]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    origin
        .iter()
        .zip(allowed)
        .map(|(&x, &ok)| {
            let offset: f64 = rng.random_range(-epsilon..=epsilon);
            if ok {
                x + offset
            } else {
                x
            }
        })
        .collect()
}

fn iterate_white_box(
    window: &SampleWindow,
    spec: &ForecasterSpec,
    cfg: &AttackConfig,
    horizon: usize,
    mask: Option<&[usize]>,
    start: Option<Vec<f64>>,
) -> Result<Vec<f64>, AttackError> {
    let allowed = mask_flags(window.context.len(), mask);
    let alpha = cfg.resolved_step_size();
    let mut current = start.unwrap_or_else(|| window.context.clone());
    for _ in 0..cfg.steps {
        let gradient = loss_gradient(spec, &current, horizon, cfg.target)?;
        signed_step_project(
            &mut current,
            &window.context,
            &gradient,
            alpha,
            cfg.epsilon,
            &allowed,
        );
    }
    Ok(current)
}

/// Black-box attack by directional gradient approximation: each step probes
/// `q` seeded random unit directions, forms
/// `g = (1/q) * sum_k ((L(x + delta*u_k) - L(x)) / delta) * u_k`,
/// and takes a projected signed step along it. Consumes exactly
/// `steps * (q + 1)` forecast queries.
pub fn dga<Q: QueryForecaster>(
    window: &SampleWindow,
    oracle: &mut Q,
    cfg: &AttackConfig,
    horizon: usize,
) -> Result<AttackResult, AttackError> {
    cfg.validate()?;
    let t = window.context.len();
    let mask = match cfg.sparsity {
        // Gradients are unavailable by construction, so sparse black-box
        // masks are always the seeded random kind.
        Some(fraction) => Some(sparsify_random(t, fraction, cfg.seed)?),
        None => None,
    };
    let allowed = mask_flags(t, mask.as_deref());
    let alpha = cfg.resolved_step_size();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut queries = 0usize;
    let mut current = window.context.clone();

    for _ in 0..cfg.steps {
        let estimate = estimate_gradient(
            oracle,
            &current,
            horizon,
            cfg.target,
            cfg.dga_directions,
            cfg.dga_delta,
            &allowed,
            &mut rng,
            &mut queries,
        )?;
        signed_step_project(
            &mut current,
            &window.context,
            &estimate,
            alpha,
            cfg.epsilon,
            &allowed,
        );
    }

    Ok(AttackResult::from_perturbed(
        &window.context,
        current,
        queries,
        mask,
    ))
}

/// One zeroth-order gradient estimate. Directions are unit vectors supported
/// on the allowed coordinates, so probes never leave the mask subspace.
#[allow(clippy::too_many_arguments)]
fn estimate_gradient<Q: QueryForecaster>(
    oracle: &mut Q,
    x: &[f64],
    horizon: usize,
    target: f64,
    directions: usize,
    delta: f64,
    allowed: &[bool],
    rng: &mut ChaCha8Rng,
    queries: &mut usize,
) -> Result<Vec<f64>, AttackError> {
    let base = query_loss(oracle, x, horizon, target, queries)?;
    let mut estimate = vec![0.0; x.len()];
    for _ in 0..directions {
        let direction = random_unit_direction(x.len(), allowed, rng);
        let probe: Vec<f64> = x
            .iter()
            .zip(&direction)
            .map(|(xi, ui)| xi + delta * ui)
            .collect();
        let probed = query_loss(oracle, &probe, horizon, target, queries)?;
        let slope = (probed - base) / delta;
        for (e, u) in estimate.iter_mut().zip(&direction) {
            *e += slope * u / directions as f64;
        }
    }
    Ok(estimate)
}

fn random_unit_direction(t: usize, allowed: &[bool], rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut direction: Vec<f64> = (0..t)
            .map(|j| {
                if allowed[j] {
                    rng.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                }
            })
            .collect();
        let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for d in &mut direction {
                *d /= norm;
            }
            return direction;
        }
    }
}

fn query_loss<Q: QueryForecaster>(
    oracle: &mut Q,
    x: &[f64],
    horizon: usize,
    target: f64,
    queries: &mut usize,
) -> Result<f64, AttackError> {
    let forecast = oracle.query(x, horizon).map_err(|source| AttackError::QueryFailed {
        queries: *queries,
        source,
    })?;
    *queries += 1;
    Ok(forecast
        .values
        .iter()
        .map(|y| (y - target) * (y - target))
        .sum::<f64>()
        / horizon as f64)
}

/// Dispatches on `cfg.method`. `AttackMethod::None` returns the window
/// unchanged, which gives evaluation harnesses a no-op baseline.
pub fn run_attack(
    window: &SampleWindow,
    spec: &ForecasterSpec,
    cfg: &AttackConfig,
    horizon: usize,
) -> Result<AttackResult, AttackError> {
    match cfg.method {
        AttackMethod::Fgsm => fgsm(window, spec, cfg, horizon),
        AttackMethod::Bim => bim(window, spec, cfg, horizon),
        AttackMethod::Pgd => pgd(window, spec, cfg, horizon),
        AttackMethod::Dga => {
            let mut oracle = spec;
            dga(window, &mut oracle, cfg, horizon)
        }
        AttackMethod::None => Ok(AttackResult::from_perturbed(
            &window.context,
            window.context.clone(),
            0,
            None,
        )),
    }
}

/// Attacks every window, in parallel when the `parallel` feature is active.
/// Output order always matches input order.
pub fn attack_windows(
    windows: &[SampleWindow],
    spec: &ForecasterSpec,
    cfg: &AttackConfig,
    horizon: usize,
) -> Result<Vec<AttackResult>, AttackError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        windows
            .par_iter()
            .map(|w| run_attack(w, spec, cfg, horizon))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        windows
            .iter()
            .map(|w| run_attack(w, spec, cfg, horizon))
            .collect()
    }
}
