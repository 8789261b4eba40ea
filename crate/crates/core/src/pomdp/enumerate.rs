//! Exhaustive history enumeration, used as the ground-truth oracle.
//!
//! The probability of a history factors into an environment part and an
//! action part:
//!
//! ```text
//! Pr(h | pi) = [ Pr(s1) * prod_t Pr(o_t | s_t) * prod_{t<T} Pr(s_{t+1} | s_t, a_t) ]
//!            * [ prod_t Pr(a_t | context_t, pi) ]
//! ```
//!
//! The final transition out of the last visited state is summed out.

use super::{compute_return, History, Pomdp, ReturnSpec, Step};
use crate::error::{Error, Result};
use crate::policy::Policy;

/// Default ceiling on the number of enumerated paths.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// A state/observation/action path with positive environment probability.
#[derive(Debug, Clone)]
pub struct EnvPath {
    pub history: History,
    pub env_prob: f64,
}

/// A history together with both factors of its probability under a policy.
#[derive(Debug, Clone)]
pub struct EnumeratedHistory {
    pub history: History,
    pub env_prob: f64,
    pub action_prob: f64,
}

impl EnumeratedHistory {
    pub fn prob(&self) -> f64 {
        self.env_prob * self.action_prob
    }
}

fn check_cap(model: &Pomdp, steps: usize, cap: u64) -> Result<()> {
    let per_step = (model.num_states * model.num_observations * model.num_actions) as f64;
    let paths = per_step.powi(steps as i32);
    if paths > cap as f64 {
        return Err(Error::EnumerationCap { paths, cap });
    }
    Ok(())
}

/// Every path with nonzero environment probability, for every action
/// sequence. Policy-independent, so one enumeration serves any number of
/// target/behavior pairs.
pub fn enumerate_paths(model: &Pomdp, spec: &ReturnSpec, cap: u64) -> Result<Vec<EnvPath>> {
    let steps = spec.num_steps();
    check_cap(model, steps, cap)?;
    let mut out = Vec::new();
    let mut trail: Vec<(usize, Step)> = Vec::with_capacity(steps);
    for s in 0..model.num_states {
        let p = model.initial_dist[s];
        if p > 0.0 {
            walk(model, steps, s, p, &mut trail, &mut out);
        }
    }
    Ok(out)
}

fn walk(model: &Pomdp, steps: usize, state: usize, prob: f64, trail: &mut Vec<(usize, Step)>, out: &mut Vec<EnvPath>) {
    for o in 0..model.num_observations {
        let po = model.observation_fn[state][o];
        if po == 0.0 {
            continue;
        }
        for a in 0..model.num_actions {
            trail.push((
                state,
                Step {
                    observation: o,
                    action: a,
                    reward: model.reward[state][a],
                },
            ));
            if trail.len() == steps {
                let states = trail.iter().map(|(s, _)| *s).collect();
                let history = History::new(trail.iter().map(|(_, st)| *st).collect()).with_state_trace(states);
                out.push(EnvPath {
                    history,
                    env_prob: prob * po,
                });
            } else {
                for (next, &pt) in model.transition[state][a].iter().enumerate() {
                    if pt > 0.0 {
                        walk(model, steps, next, prob * po * pt, trail, out);
                    }
                }
            }
            trail.pop();
        }
    }
}

/// All histories with positive probability under `policy`, each with its
/// environment and action probability factors.
pub fn enumerate_histories(model: &Pomdp, spec: &ReturnSpec, policy: &Policy) -> Result<Vec<EnumeratedHistory>> {
    model.check_policy_dims(policy.num_observations(), policy.num_actions())?;
    let paths = enumerate_paths(model, spec, DEFAULT_ENUMERATION_CAP)?;
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let action_prob = policy.log_prob_actions(&path.history)?.exp();
        if action_prob > 0.0 {
            out.push(EnumeratedHistory {
                history: path.history,
                env_prob: path.env_prob,
                action_prob,
            });
        }
    }
    Ok(out)
}

/// `V(pi) = sum_h Pr(h | pi) R(h)` by full enumeration.
pub fn exact_value(model: &Pomdp, policy: &Policy, spec: &ReturnSpec) -> Result<f64> {
    let mut v = 0.0;
    for e in enumerate_histories(model, spec, policy)? {
        v += e.prob() * compute_return(&e.history, spec)?;
    }
    Ok(v)
}
