//! Value estimators over persisted sample sets: crude Monte Carlo,
//! importance sampling (likelihood ratio), weighted importance sampling and
//! the multiple-behavior mixture estimator. Exact enumeration counterparts
//! live in [`exact`].

pub mod exact;

pub use exact::{
    crude_variance_exact, eta_bound, is_expectation_exact, is_variance_exact, is_variance_line1,
    optimal_sampling_check, OptimalSampling,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, mean, pairwise_sum, sample_variance};
use crate::policy::Policy;
use crate::pomdp::{compute_return, simulate_history, History, Pomdp, ReturnSpec};
use crate::seed::derive_seed;

/// Histories drawn under one behavior policy, with cached returns and the
/// seeds that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub histories: Vec<History>,
    pub behavior_policy_id: String,
    pub returns: Vec<f64>,
    pub spec: ReturnSpec,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
}

impl SampleSet {
    /// Wraps histories, computing their returns and checking that every
    /// history carries positive behavior probabilities.
    pub fn new(
        histories: Vec<History>,
        behavior_policy_id: impl Into<String>,
        spec: ReturnSpec,
        master_seed: u64,
        seeds: Vec<u64>,
    ) -> Result<Self> {
        if seeds.len() != histories.len() {
            return Err(Error::input("seeds", "one seed per history required"));
        }
        let mut returns = Vec::with_capacity(histories.len());
        for (i, h) in histories.iter().enumerate() {
            let probs = h
                .behavior_probs
                .as_ref()
                .ok_or(Error::MissingBehaviorProbabilities(i))?;
            if probs.len() != h.len() {
                return Err(Error::input(
                    format!("histories[{i}].behavior_probs"),
                    "one probability per step required",
                ));
            }
            if let Some(step) = probs.iter().position(|&p| !(p > 0.0)) {
                return Err(Error::ZeroBehaviorProbability { history: i, step });
            }
            returns.push(compute_return(h, &spec)?);
        }
        Ok(SampleSet {
            histories,
            behavior_policy_id: behavior_policy_id.into(),
            returns,
            spec,
            master_seed,
            seeds,
        })
    }

    /// Sampling stage: `n` histories under `behavior`, history `i` seeded
    /// with `derive_seed(master_seed, i)`.
    pub fn simulate(model: &Pomdp, behavior: &Policy, spec: &ReturnSpec, n: usize, master_seed: u64) -> Result<Self> {
        let seeds: Vec<u64> = (0..n as u64).map(|i| derive_seed(master_seed, i)).collect();
        let histories = seeds
            .iter()
            .map(|&s| simulate_history(model, behavior, spec, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(histories, behavior.id(), *spec, master_seed, seeds)
    }

    pub fn len(&self) -> usize {
        self.histories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histories.is_empty()
    }

    /// Smallest recorded behavior probability.
    pub fn min_behavior_prob(&self) -> f64 {
        self.histories
            .iter()
            .flat_map(|h| h.behavior_probs.iter().flatten())
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Crude,
    Is,
    Wis,
    Mixture,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Crude => "crude",
            EstimatorKind::Is => "is",
            EstimatorKind::Wis => "wis",
            EstimatorKind::Mixture => "mixture",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl WeightStats {
    fn of(w: &[f64]) -> Self {
        WeightStats {
            min: w.iter().copied().fold(f64::INFINITY, f64::min),
            max: w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: mean(w),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub weight_stats: Option<WeightStats>,
    pub kind: EstimatorKind,
}

fn mean_estimate(terms: &[f64], weights: Option<&[f64]>, kind: EstimatorKind) -> Estimate {
    let n = terms.len();
    Estimate {
        value: mean(terms),
        std_error: (sample_variance(terms) / n as f64).sqrt(),
        n_samples: n,
        weight_stats: weights.map(WeightStats::of),
        kind,
    }
}

/// On-policy sample mean of the returns.
pub fn crude_estimate(returns: &[f64]) -> Result<Estimate> {
    if returns.is_empty() {
        return Err(Error::Empty("return list"));
    }
    Ok(mean_estimate(returns, None, EstimatorKind::Crude))
}

fn log_weight(target: &Policy, h: &History, index: usize) -> Result<f64> {
    let probs = h
        .behavior_probs
        .as_ref()
        .ok_or(Error::MissingBehaviorProbabilities(index))?;
    let mut log_behavior = 0.0;
    for (step, &p) in probs.iter().enumerate() {
        if !(p > 0.0) {
            return Err(Error::ZeroBehaviorProbability { history: index, step });
        }
        log_behavior += p.ln();
    }
    Ok(target.log_prob_actions(h)? - log_behavior)
}

/// `Pr(h | target) / Pr(h | behavior)` from the action probabilities alone,
/// using the behavior probabilities recorded in `h`. The environment factor
/// cancels, so no model is needed.
pub fn likelihood_ratio(target: &Policy, h: &History) -> Result<f64> {
    Ok(log_weight(target, h, 0)?.exp())
}

fn weights(samples: &SampleSet, target: &Policy) -> Result<Vec<f64>> {
    samples
        .histories
        .iter()
        .enumerate()
        .map(|(i, h)| Ok(log_weight(target, h, i)?.exp()))
        .collect()
}

/// Importance-sampling estimate `(1/N) sum_i R(h_i) w(h_i)`.
pub fn is_estimate(samples: &SampleSet, target: &Policy) -> Result<Estimate> {
    if samples.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    let w = weights(samples, target)?;
    let terms: Vec<f64> = samples.returns.iter().zip(&w).map(|(r, w)| r * w).collect();
    Ok(mean_estimate(&terms, Some(&w), EstimatorKind::Is))
}

/// Self-normalized estimate `sum_i w_i R_i / sum_i w_i`.
///
/// The standard error is the delta-method approximation
/// `sqrt(sum w_i^2 (R_i - v)^2) / sum w_i`.
pub fn wis_estimate(samples: &SampleSet, target: &Policy) -> Result<Estimate> {
    if samples.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    let w = weights(samples, target)?;
    let total = pairwise_sum(&w);
    if !(total > 0.0) {
        return Err(Error::AllWeightsZero);
    }
    let weighted: Vec<f64> = samples.returns.iter().zip(&w).map(|(r, w)| r * w).collect();
    let value = pairwise_sum(&weighted) / total;
    let spread: Vec<f64> = samples
        .returns
        .iter()
        .zip(&w)
        .map(|(r, w)| (w * (r - value)).powi(2))
        .collect();
    Ok(Estimate {
        value,
        std_error: pairwise_sum(&spread).sqrt() / total,
        n_samples: w.len(),
        weight_stats: Some(WeightStats::of(&w)),
        kind: EstimatorKind::Wis,
    })
}

/// One behavior policy's contribution to a mixture sample.
#[derive(Debug, Clone, Copy)]
pub struct MixtureComponent<'a> {
    pub samples: &'a SampleSet,
    pub behavior: &'a Policy,
    pub prior: f64,
}

/// Pooled estimate over several behavior policies with weights
/// `Pr(h_a | target) / sum_j prior_j Pr(h_a | behavior_j)`.
///
/// Unbiased when the histories are drawn from the prior mixture, which the
/// stratified case matches when set sizes are proportional to the priors.
pub fn mixture_is_estimate(components: &[MixtureComponent<'_>], target: &Policy) -> Result<Estimate> {
    if components.is_empty() {
        return Err(Error::Empty("mixture"));
    }
    let prior_sum: f64 = components.iter().map(|c| c.prior).sum();
    if components.iter().any(|c| !(c.prior > 0.0)) || (prior_sum - 1.0).abs() > 1e-9 {
        return Err(Error::input("priors", "must be positive and sum to 1"));
    }
    let log_priors: Vec<f64> = components.iter().map(|c| c.prior.ln()).collect();
    let mut terms = Vec::new();
    let mut ws = Vec::new();
    let mut index = 0;
    for c in components {
        for (h, r) in c.samples.histories.iter().zip(&c.samples.returns) {
            let mut mix = Vec::with_capacity(components.len());
            for (d, lp) in components.iter().zip(&log_priors) {
                mix.push(lp + d.behavior.log_prob_actions(h)?);
            }
            let log_den = log_sum_exp(&mix);
            if log_den == f64::NEG_INFINITY {
                return Err(Error::ZeroBehaviorProbability {
                    history: index,
                    step: 0,
                });
            }
            let w = (target.log_prob_actions(h)? - log_den).exp();
            terms.push(r * w);
            ws.push(w);
            index += 1;
        }
    }
    if terms.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    Ok(mean_estimate(&terms, Some(&ws), EstimatorKind::Mixture))
}
