//! Born-rule branch sampling and effective-collapse bookkeeping.
//!
//! Draw `i` uses ChaCha8 keyed by the seed and positioned at word `2 i`, so
//! every draw depends only on `(seed, i)` and chunks can be produced in any
//! order on any number of threads.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Decomposition, Observable};

const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub weights: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

impl SamplingPlan {
    /// Weights are renormalized; anything farther than `1e-10` from a
    /// probability vector before that (beyond dropped mass) is rejected.
    pub fn new(weights: Vec<f64>, n_samples: usize, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::Parameter {
                name: "n_samples",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Invalid("weights must be finite and nonnegative".into()));
        }
        Ok(Self {
            weights,
            n_samples,
            seed,
        })
    }

    pub fn for_decomposition(d: &Decomposition, n_samples: usize, seed: u64) -> Result<Self> {
        let w = d.weights();
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-10 + d.dropped_norm().powi(2) * 2.0 {
            return Err(Error::Invalid(format!("weights sum to {total}")));
        }
        Self::new(w, n_samples, seed)
    }
}

fn unit_interval(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// i.i.d. branch indices with `P(i) = w_i / sum w`.
pub fn sample_branches(plan: &SamplingPlan) -> Vec<usize> {
    let total: f64 = plan.weights.iter().sum();
    let mut cdf: Vec<f64> = plan
        .weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w / total;
            Some(*acc)
        })
        .collect();
    *cdf.last_mut().expect("nonempty weights") = 1.0;
    let chunks: Vec<Vec<usize>> = (0..plan.n_samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(plan.n_samples);
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            rng.set_word_pos(start as u128 * 2);
            (start..end)
                .map(|_| {
                    let u = unit_interval(rng.next_u64());
                    cdf.partition_point(|&p| p <= u).min(cdf.len() - 1)
                })
                .collect()
        })
        .collect();
    chunks.concat()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableCollapse {
    pub observable: String,
    pub full_expectation: f64,
    /// Exact `sum_i w_i <O>_i`.
    pub branch_mean: f64,
    pub sampled_mean: f64,
    pub sample_std_error: f64,
    /// Signed `full - branch_mean`.
    pub off_diagonal_residual: f64,
    /// `sum_{i != j} Re <psi_i|O|psi_j>`, computed directly.
    pub off_diagonal_direct: f64,
    pub per_branch: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub n_samples: usize,
    pub seed: u64,
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
    pub counts: Vec<usize>,
    pub observables: Vec<ObservableCollapse>,
}

pub fn collapse_report(
    d: &Decomposition,
    observables: &[Observable],
    n_samples: usize,
    seed: u64,
) -> Result<CollapseReport> {
    let plan = SamplingPlan::for_decomposition(d, n_samples, seed)?;
    let draws = sample_branches(&plan);
    let mut counts = vec![0usize; d.len()];
    for &i in &draws {
        counts[i] += 1;
    }
    let rows = observables
        .par_iter()
        .map(|obs| {
            let e = d.expectation(obs)?;
            let n = draws.len() as f64;
            let sampled_mean = counts
                .iter()
                .zip(&e.per_branch)
                .map(|(&c, &v)| c as f64 * v)
                .sum::<f64>()
                / n;
            let var = if draws.len() > 1 {
                counts
                    .iter()
                    .zip(&e.per_branch)
                    .map(|(&c, &v)| c as f64 * (v - sampled_mean).powi(2))
                    .sum::<f64>()
                    / (n - 1.0)
            } else {
                0.0
            };
            Ok(ObservableCollapse {
                observable: e.observable,
                full_expectation: e.full,
                branch_mean: e.branch_mean,
                sampled_mean,
                sample_std_error: var.sqrt() / n.sqrt(),
                off_diagonal_residual: e.full - e.branch_mean,
                off_diagonal_direct: e.off_diagonal,
                per_branch: e.per_branch,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CollapseReport {
        n_samples,
        seed,
        labels: d.labels().to_vec(),
        weights: d.weights(),
        counts,
        observables: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_decomposition, LatticeSpec, ProjectorSpec, StateVector};

    /// Uniform draw in `[0, 1)` for draw index `i`, computed in isolation.
    fn uniform(seed: u64, i: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(u128::from(i) * 2);
        unit_interval(rng.next_u64())
    }

    #[test]
    fn single_branch_always_zero() {
        let plan = SamplingPlan::new(vec![1.0], 100, 9).unwrap();
        assert!(sample_branches(&plan).iter().all(|&i| i == 0));
    }

    #[test]
    fn frequencies_follow_weights() {
        for (w, seed) in [(0.5, 1u64), (0.9, 2)] {
            let plan = SamplingPlan::new(vec![w, 1.0 - w], 10_000, seed).unwrap();
            let zeros = sample_branches(&plan).iter().filter(|&&i| i == 0).count() as f64 / 1e4;
            assert!(
                (zeros - w).abs() <= 3.0 * (w * (1.0 - w) / 1e4).sqrt(),
                "{zeros} vs {w}"
            );
        }
    }

    #[test]
    fn draws_are_counter_based() {
        let plan = SamplingPlan::new(vec![0.3, 0.3, 0.4], 10_000, 5).unwrap();
        let draws = sample_branches(&plan);
        let cdf = [0.3, 0.6, 1.0];
        for i in [0usize, 1, 4095, 4096, 9999] {
            let u = uniform(5, i as u64);
            assert_eq!(draws[i], cdf.iter().position(|&p| u < p).unwrap());
        }
    }

    #[test]
    fn ghz2_collapse() {
        let l = LatticeSpec::new(2).unwrap();
        let d = make_decomposition(
            &StateVector::ghz(l),
            &[
                ProjectorSpec::BasisStates { indices: vec![0] },
                ProjectorSpec::BasisStates { indices: vec![3] },
            ],
        )
        .unwrap();
        let r = collapse_report(
            &d,
            &[Observable::pauli("Z0").unwrap(), Observable::pauli("X0 X1").unwrap()],
            1000,
            3,
        )
        .unwrap();
        let z = &r.observables[0];
        assert!(z.full_expectation.abs() < 1e-12 && z.off_diagonal_residual.abs() < 1e-12);
        let xx = &r.observables[1];
        assert!((xx.full_expectation - 1.0).abs() < 1e-12);
        assert!(xx.branch_mean.abs() < 1e-12);
        assert!((xx.off_diagonal_residual - 1.0).abs() < 1e-12);
        assert!((xx.off_diagonal_residual - xx.off_diagonal_direct).abs() < 1e-12);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(SamplingPlan::new(vec![1.0], 0, 0).is_err());
    }
}
