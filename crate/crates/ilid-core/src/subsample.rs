//! Index plans that shorten a length-T context into S equal-length variants.
//!
//! Two plan families: stride-with-offset (the odd/even split is the stride-2
//! case) and seeded random-fraction sampling. Plan randomness lives on its own
//! seeded stream, separate from attack seeds: the defender's sampling choices
//! are private state an attacker cannot condition on.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::SampleWindow;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("stride must be at least 2, got {0}")]
    StrideTooSmall(usize),
    #[error("need at least 2 offsets, got {0}")]
    TooFewOffsets(usize),
    #[error("duplicate offset {0}")]
    DuplicateOffset(usize),
    #[error("offset {offset} out of range for T={t}")]
    OffsetOutOfRange { offset: usize, t: usize },
    #[error("need at least 2 subsamples, got {0}")]
    TooFewSubsamples(usize),
    #[error("fraction must be in (0, 1), got {0}")]
    BadFraction(f64),
    #[error("subsample length {len} below minimum of 2 (T={t})")]
    SubsampleTooShort { len: usize, t: usize },
    #[error("plan built for T={plan_t} applied to context of length {context_len}")]
    LengthMismatch { plan_t: usize, context_len: usize },
}

/// How a plan's index sets were constructed. Serialized into model files and
/// reports so a run can be reproduced exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanDescriptor {
    Stride { stride: usize, offsets: Vec<usize> },
    RandomFraction { fraction: f64, count: usize, seed: u64 },
}

/// S strictly-increasing index sets of common length into `[0, T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsamplePlan {
    #[serde(rename = "T")]
    pub t: usize,
    pub descriptor: PlanDescriptor,
    pub index_sets: Vec<Vec<usize>>,
}

impl SubsamplePlan {
    /// Number of subsamples S.
    pub fn count(&self) -> usize {
        self.index_sets.len()
    }

    /// Common subsample length.
    pub fn len(&self) -> usize {
        self.index_sets.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.index_sets.is_empty()
    }

    /// Rebuilds the index sets from a descriptor. Plans are pure functions of
    /// (T, descriptor), so this reproduces a serialized plan exactly.
    pub fn from_descriptor(t: usize, descriptor: &PlanDescriptor) -> Result<Self, PlanError> {
        match descriptor {
            PlanDescriptor::Stride { stride, offsets } => stride_plan(t, *stride, offsets),
            PlanDescriptor::RandomFraction {
                fraction,
                count,
                seed,
            } => random_fraction_plan(t, *fraction, *count, *seed),
        }
    }
}

/// Builds index sets `{offset, offset+s, offset+2s, ...} ∩ [0, T)`, one per
/// offset, truncated to the shortest set so all variants share one length.
pub fn stride_plan(t: usize, stride: usize, offsets: &[usize]) -> Result<SubsamplePlan, PlanError> {
    if stride < 2 {
        return Err(PlanError::StrideTooSmall(stride));
    }
    if offsets.len() < 2 {
        return Err(PlanError::TooFewOffsets(offsets.len()));
    }
    let mut seen = std::collections::HashSet::new();
    for &offset in offsets {
        if !seen.insert(offset) {
            return Err(PlanError::DuplicateOffset(offset));
        }
        if offset >= t {
            return Err(PlanError::OffsetOutOfRange { offset, t });
        }
    }

    let sets: Vec<Vec<usize>> = offsets
        .iter()
        .map(|&offset| (offset..t).step_by(stride).collect())
        .collect();
    let common_len = sets.iter().map(Vec::len).min().unwrap_or(0);
    if common_len < 2 {
        return Err(PlanError::SubsampleTooShort { len: common_len, t });
    }
    let index_sets = sets
        .into_iter()
        .map(|mut set| {
            set.truncate(common_len);
            set
        })
        .collect();

    Ok(SubsamplePlan {
        t,
        descriptor: PlanDescriptor::Stride {
            stride,
            offsets: offsets.to_vec(),
        },
        index_sets,
    })
}

/// Builds `count` sorted uniform samples without replacement of size
/// `round(fraction * T)`. Deterministic in `seed`; sets may overlap.
pub fn random_fraction_plan(
    t: usize,
    fraction: f64,
    count: usize,
    seed: u64,
) -> Result<SubsamplePlan, PlanError> {
    if !(0.0..1.0).contains(&fraction) || fraction == 0.0 {
        return Err(PlanError::BadFraction(fraction));
    }
    if count < 2 {
        return Err(PlanError::TooFewSubsamples(count));
    }
    let len = (fraction * t as f64).round() as usize;
    if len < 2 {
        return Err(PlanError::SubsampleTooShort { len, t });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index_sets = (0..count)
        .map(|_| {
            let mut set = rand::seq::index::sample(&mut rng, t, len).into_vec();
            set.sort_unstable();
            set
        })
        .collect();

    Ok(SubsamplePlan {
        t,
        descriptor: PlanDescriptor::RandomFraction {
            fraction,
            count,
            seed,
        },
        index_sets,
    })
}

/// Gathers the context at each index set, preserving temporal order.
pub fn apply_plan(window: &SampleWindow, plan: &SubsamplePlan) -> Result<Vec<Vec<f64>>, PlanError> {
    if window.context.len() != plan.t {
        return Err(PlanError::LengthMismatch {
            plan_t: plan.t,
            context_len: window.context.len(),
        });
    }
    Ok(plan
        .index_sets
        .iter()
        .map(|set| set.iter().map(|&i| window.context[i]).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn window(context: Vec<f64>) -> SampleWindow {
        SampleWindow {
            context,
            truth: None,
            origin_index: 0,
        }
    }

    #[test]
    fn odd_even_split() {
        let plan = stride_plan(8, 2, &[0, 1]).unwrap();
        assert_eq!(plan.index_sets, vec![vec![0, 2, 4, 6], vec![1, 3, 5, 7]]);
    }

    #[test]
    fn stride_three_from_256_gives_length_85() {
        let plan = stride_plan(256, 3, &[1, 2, 3]).unwrap();
        assert_eq!(plan.count(), 3);
        assert_eq!(plan.len(), 85);
    }

    #[test]
    fn uneven_sets_truncate_to_common_length() {
        let plan = stride_plan(9, 2, &[0, 1]).unwrap();
        assert_eq!(plan.index_sets, vec![vec![0, 2, 4, 6], vec![1, 3, 5, 7]]);
    }

    #[test]
    fn stride_one_rejected() {
        assert!(matches!(
            stride_plan(8, 1, &[0, 1]),
            Err(PlanError::StrideTooSmall(1))
        ));
    }

    #[test]
    fn duplicate_offsets_rejected() {
        assert!(matches!(
            stride_plan(8, 2, &[1, 1]),
            Err(PlanError::DuplicateOffset(1))
        ));
    }

    #[test]
    fn random_fraction_is_seed_deterministic() {
        let a = random_fraction_plan(10, 0.6, 3, 1).unwrap();
        let b = random_fraction_plan(10, 0.6, 3, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.count(), 3);
        assert_eq!(a.len(), 6);
        for set in &a.index_sets {
            assert!(set.windows(2).all(|w| w[0] < w[1]));
            assert!(set.iter().all(|&i| i < 10));
        }
        let c = random_fraction_plan(10, 0.6, 3, 2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_fraction_rejected() {
        assert!(matches!(
            random_fraction_plan(3, 0.3, 2, 0),
            Err(PlanError::SubsampleTooShort { len: 1, .. })
        ));
    }

    #[test]
    fn apply_plan_gathers_in_order() {
        let plan = stride_plan(4, 2, &[0, 1]).unwrap();
        let variants = apply_plan(&window(vec![10.0, 20.0, 30.0, 40.0]), &plan).unwrap();
        assert_eq!(variants, vec![vec![10.0, 30.0], vec![20.0, 40.0]]);
    }

    #[test]
    fn apply_plan_rejects_length_mismatch() {
        let plan = stride_plan(4, 2, &[0, 1]).unwrap();
        let err = apply_plan(&window(vec![1.0; 5]), &plan).unwrap_err();
        assert!(matches!(err, PlanError::LengthMismatch { plan_t: 4, context_len: 5 }));
    }

    #[test]
    fn full_offset_stride_partitions_prefix() {
        // Offsets 0..s must tile [0, s*len) with no gaps or overlaps.
        for t in 4..=64usize {
            for s in 2..=8usize.min(t / 2) {
                let offsets: Vec<usize> = (0..s).collect();
                let Ok(plan) = stride_plan(t, s, &offsets) else {
                    continue;
                };
                let len = plan.len();
                let mut covered: Vec<usize> =
                    plan.index_sets.iter().flatten().copied().collect();
                covered.sort_unstable();
                let expected: Vec<usize> = (0..s * len).collect();
                assert_eq!(covered, expected, "T={t}, s={s}");
            }
        }
    }

    #[test]
    fn descriptor_round_trips_through_json() {
        let plan = random_fraction_plan(32, 0.5, 4, 99).unwrap();
        let json = serde_json::to_string(&plan).unwrap();
        let back: SubsamplePlan = serde_json::from_str(&json).unwrap();
        assert_eq!(plan, back);
        let rebuilt = SubsamplePlan::from_descriptor(back.t, &back.descriptor).unwrap();
        assert_eq!(plan, rebuilt);
    }

    proptest! {
        #[test]
        fn outputs_preserve_temporal_order(
            t in 6usize..64,
            stride in 2usize..6,
            values in proptest::collection::vec(-100.0f64..100.0, 64),
        ) {
            let offsets: Vec<usize> = (0..stride).collect();
            if let Ok(plan) = stride_plan(t, stride, &offsets) {
                let w = window(values[..t].to_vec());
                let variants = apply_plan(&w, &plan).unwrap();
                for (variant, set) in variants.iter().zip(&plan.index_sets) {
                    prop_assert!(set.windows(2).all(|p| p[0] < p[1]));
                    for (v, &i) in variant.iter().zip(set) {
                        prop_assert_eq!(*v, w.context[i]);
                    }
                }
            }
        }

        #[test]
        fn random_plans_are_pure_functions_of_inputs(
            t in 8usize..128,
            count in 2usize..6,
            seed in 0u64..1000,
        ) {
            let a = random_fraction_plan(t, 0.5, count, seed).unwrap();
            let b = random_fraction_plan(t, 0.5, count, seed).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
