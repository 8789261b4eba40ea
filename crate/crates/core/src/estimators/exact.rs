//! Exact moments of the estimators by full enumeration, the likelihood-ratio
//! ceiling, and the zero-variance sampling distribution.

use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::pomdp::{compute_return, enumerate_paths, History, Pomdp, ReturnSpec, DEFAULT_ENUMERATION_CAP};

/// Per-path quantities shared by the exact moment computations.
struct PairTerm {
    ret: f64,
    target_prob: f64,
    behavior_prob: f64,
}

fn pair_terms(model: &Pomdp, target: &Policy, behavior: &Policy, spec: &ReturnSpec) -> Result<Vec<PairTerm>> {
    model.check_policy_dims(target.num_observations(), target.num_actions())?;
    model.check_policy_dims(behavior.num_observations(), behavior.num_actions())?;
    let mut out = Vec::new();
    for path in enumerate_paths(model, spec, DEFAULT_ENUMERATION_CAP)? {
        let lt = target.log_prob_actions(&path.history)?;
        let lb = behavior.log_prob_actions(&path.history)?;
        if lt == f64::NEG_INFINITY && lb == f64::NEG_INFINITY {
            continue;
        }
        if lb == f64::NEG_INFINITY {
            return Err(Error::UnsupportedTarget);
        }
        out.push(PairTerm {
            ret: compute_return(&path.history, spec)?,
            target_prob: path.env_prob * lt.exp(),
            behavior_prob: path.env_prob * lb.exp(),
        });
    }
    Ok(out)
}

impl PairTerm {
    fn weight(&self) -> f64 {
        self.target_prob / self.behavior_prob
    }
}

fn value(terms: &[PairTerm]) -> f64 {
    terms.iter().map(|t| t.target_prob * t.ret).sum()
}

/// `E_behavior[R(h) w(h)]`, the expectation of a single importance-sampling
/// term. Equals `V(target)` whenever the behavior covers the target.
pub fn is_expectation_exact(model: &Pomdp, target: &Policy, behavior: &Policy, spec: &ReturnSpec) -> Result<f64> {
    let terms = pair_terms(model, target, behavior, spec)?;
    Ok(terms.iter().map(|t| t.behavior_prob * t.ret * t.weight()).sum())
}

/// Variance of the `n`-sample importance-sampling estimator as
/// `(1/n) (E_target[R^2 w] - V^2)`.
pub fn is_variance_exact(
    model: &Pomdp,
    target: &Policy,
    behavior: &Policy,
    spec: &ReturnSpec,
    n: usize,
) -> Result<f64> {
    let terms = pair_terms(model, target, behavior, spec)?;
    let v = value(&terms);
    let second: f64 = terms.iter().map(|t| t.target_prob * t.ret * t.ret * t.weight()).sum();
    Ok((second - v * v) / n as f64)
}

/// The same variance written as `(1/n) (sum_h (R w)^2 Pr(h|behavior) - V^2)`.
pub fn is_variance_line1(
    model: &Pomdp,
    target: &Policy,
    behavior: &Policy,
    spec: &ReturnSpec,
    n: usize,
) -> Result<f64> {
    let terms = pair_terms(model, target, behavior, spec)?;
    let v = value(&terms);
    let second: f64 = terms
        .iter()
        .map(|t| (t.ret * t.weight()).powi(2) * t.behavior_prob)
        .sum();
    Ok((second - v * v) / n as f64)
}

/// Variance of the on-policy sample mean, `(1/n) (E[R^2] - V^2)`.
pub fn crude_variance_exact(model: &Pomdp, policy: &Policy, spec: &ReturnSpec, n: usize) -> Result<f64> {
    is_variance_exact(model, policy, policy, spec, n)
}

/// Largest possible likelihood ratio against the uniform behavior policy
/// over `horizon` steps when every target probability is at least `floor`:
/// `(|A| (1 - (|A| - 1) floor))^T`, which is `2^T (1 - floor)^T` for two
/// actions.
pub fn eta_bound(horizon: usize, floor: f64, num_actions: usize) -> Result<f64> {
    if num_actions == 0 {
        return Err(Error::input("num_actions", "must be positive"));
    }
    let a = num_actions as f64;
    if !(floor >= 0.0 && floor <= 1.0 / a) {
        return Err(Error::input(
            "c_floor",
            format!("must be in [0, 1/{num_actions}], got {floor}"),
        ));
    }
    Ok((a * (1.0 - (a - 1.0) * floor)).powi(horizon as i32))
}

/// The zero-variance sampling distribution `R(h) Pr(h|pi) / V(pi)` and the
/// variance of the estimator it induces.
#[derive(Debug, Clone)]
pub struct OptimalSampling {
    /// Histories with positive target probability and their optimal
    /// sampling probabilities.
    pub distribution: Vec<(History, f64)>,
    pub value: f64,
    /// `sum_h Pr*(h) (xi(h) - V)^2` with `xi = R Pr(h|pi) / Pr*(h)`.
    pub variance: f64,
    /// The reweighted sample `xi(h)` for every history with `Pr*(h) > 0`.
    pub reweighted: Vec<f64>,
}

/// Builds the optimal sampling distribution by enumeration. Oracle-only: it
/// needs the full model. Requires nonnegative returns and `V(pi) > 0`.
pub fn optimal_sampling_check(model: &Pomdp, target: &Policy, spec: &ReturnSpec) -> Result<OptimalSampling> {
    let paths = enumerate_paths(model, spec, DEFAULT_ENUMERATION_CAP)?;
    let mut entries = Vec::with_capacity(paths.len());
    for path in paths {
        let p = path.env_prob * target.log_prob_actions(&path.history)?.exp();
        if p == 0.0 {
            continue;
        }
        let r = compute_return(&path.history, spec)?;
        if r < 0.0 {
            return Err(Error::input("returns", "optimal sampling requires nonnegative returns"));
        }
        entries.push((path.history, p, r));
    }
    let value: f64 = entries.iter().map(|(_, p, r)| p * r).sum();
    if !(value > 0.0) {
        return Err(Error::input("returns", "optimal sampling requires V(pi) > 0"));
    }
    let mut variance = 0.0;
    let mut reweighted = Vec::new();
    let distribution = entries
        .into_iter()
        .map(|(h, p, r)| {
            let q = r * p / value;
            if q > 0.0 {
                let xi = r * p / q;
                variance += q * (xi - value).powi(2);
                reweighted.push(xi);
            }
            (h, q)
        })
        .collect();
    Ok(OptimalSampling {
        distribution,
        value,
        variance,
        reweighted,
    })
}
