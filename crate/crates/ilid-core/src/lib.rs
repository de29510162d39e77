//! Detection of adversarial inputs to variable-length time-series forecasters.
//!
//! The core idea: forecast several shortened subsamples of each input window
//! and measure how well the forecasts agree. Benign windows produce consistent
//! forecasts under subsampling; adversarially perturbed windows do not, because
//! a perturbation optimized against the full-length input does not transfer to
//! shorter, differently-structured variants. Windows whose forecast similarity
//! falls below a threshold calibrated from benign data are flagged.
//!
//! Modules map onto the pipeline stages:
//!
//! - [`series`]: CSV ingestion, windowing, z-score normalization
//! - [`forecaster`]: the pluggable variable-length forecasting interface,
//!   three deterministic reference forecasters, and an HTTP adapter
//! - [`subsample`]: stride and random-fraction subsampling plans
//! - [`similarity`]: pairwise forecast similarity (Pearson / distance-derived)
//! - [`calibration`]: threshold estimation at a preset false-rejection rate,
//!   plus the dynamic fixed-capacity-buffer variant
//! - [`detector`]: the online scoring/decision pipeline and FRR/FAR evaluation
//! - [`attack`]: white-box (FGSM/BIM/PGD) and black-box (directional gradient
//!   approximation) attack generation used to produce adversarial test inputs
//! - [`synthetic`]: the bundled seeded benchmark scenario
//!
//! Batch operations over windows run on rayon when the `parallel` feature is
//! enabled (the default) and fall back to sequential iteration otherwise.
//! Results are identical either way: per-window outputs are collected in input
//! order and reduced sequentially.

pub mod attack;
pub mod calibration;
pub mod detector;
pub mod forecaster;
pub mod normal;
pub mod series;
pub mod similarity;
pub mod subsample;
pub mod synthetic;
