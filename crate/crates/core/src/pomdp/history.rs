use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Pomdp;
use crate::error::{Error, Result};
use crate::policy::Policy;

/// How rewards along a history are folded into a scalar return.
///
/// Finite-horizon returns sum the `horizon` rewards `r(1)..r(T)`. Discounted
/// returns sum `gamma^t r(t)` for `t = 0..=horizon`, so they consume
/// `horizon + 1` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReturnSpec {
    FiniteHorizon { horizon: usize, r_max: f64 },
    Discounted { horizon: usize, gamma: f64, r_max: f64 },
}

impl ReturnSpec {
    pub fn horizon(&self) -> usize {
        match *self {
            ReturnSpec::FiniteHorizon { horizon, .. } | ReturnSpec::Discounted { horizon, .. } => horizon,
        }
    }

    pub fn r_max(&self) -> f64 {
        match *self {
            ReturnSpec::FiniteHorizon { r_max, .. } | ReturnSpec::Discounted { r_max, .. } => r_max,
        }
    }

    /// Number of steps a history must carry for this return.
    pub fn num_steps(&self) -> usize {
        match *self {
            ReturnSpec::FiniteHorizon { horizon, .. } => horizon,
            ReturnSpec::Discounted { horizon, .. } => horizon + 1,
        }
    }

    /// Bound on `|R(h)|`: `T * r_max` or `r_max / (1 - gamma)`.
    pub fn return_bound(&self) -> f64 {
        match *self {
            ReturnSpec::FiniteHorizon { horizon, r_max } => horizon as f64 * r_max,
            ReturnSpec::Discounted { gamma, r_max, .. } => r_max / (1.0 - gamma),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon() == 0 {
            return Err(Error::input("return_spec.horizon", "must be positive"));
        }
        if !(self.r_max().is_finite() && self.r_max() >= 0.0) {
            return Err(Error::input("return_spec.r_max", "must be finite and nonnegative"));
        }
        if let ReturnSpec::Discounted { gamma, .. } = *self {
            if !(gamma > 0.0 && gamma < 1.0) {
                return Err(Error::input(
                    "return_spec.gamma",
                    format!("must be in (0,1), got {gamma}"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub observation: usize,
    pub action: usize,
    pub reward: f64,
}

/// One trajectory of `(observation, action, reward)` steps.
///
/// `behavior_probs[t]` is the probability the generating policy assigned to
/// `steps[t].action`, recorded at simulation time. The hidden state trace is
/// kept for oracle checks only and is never read by estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub steps: Vec<Step>,
    pub behavior_probs: Option<Vec<f64>>,
    pub terminal_observation: Option<usize>,
    state_trace: Option<Vec<usize>>,
}

impl History {
    pub fn new(steps: Vec<Step>) -> Self {
        History {
            steps,
            behavior_probs: None,
            terminal_observation: None,
            state_trace: None,
        }
    }

    pub fn with_behavior_probs(mut self, probs: Vec<f64>) -> Self {
        self.behavior_probs = Some(probs);
        self
    }

    pub(crate) fn with_state_trace(mut self, states: Vec<usize>) -> Self {
        self.state_trace = Some(states);
        self
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn observations(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.observation).collect()
    }

    /// Hidden states visited, when the history came from a simulator or
    /// the enumeration oracle.
    pub fn oracle_state_trace(&self) -> Option<&[usize]> {
        self.state_trace.as_deref()
    }
}

pub(crate) fn sample_index(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// Draw one history under `policy`, recording the per-step behavior action
/// probabilities. A pure function of its arguments.
pub fn simulate_history(model: &Pomdp, policy: &Policy, spec: &ReturnSpec, seed: u64) -> Result<History> {
    model.check_policy_dims(policy.num_observations(), policy.num_actions())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.num_steps();
    let mut steps = Vec::with_capacity(n);
    let mut probs = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let mut observations = Vec::with_capacity(n);

    let mut s = sample_index(&mut rng, &model.initial_dist);
    for _ in 0..n {
        let o = sample_index(&mut rng, &model.observation_fn[s]);
        observations.push(o);
        let dist = policy.action_distribution(&observations)?;
        let a = sample_index(&mut rng, dist);
        steps.push(Step {
            observation: o,
            action: a,
            reward: model.reward[s][a],
        });
        probs.push(dist[a]);
        states.push(s);
        s = sample_index(&mut rng, &model.transition[s][a]);
    }
    let terminal = sample_index(&mut rng, &model.observation_fn[s]);

    let mut h = History::new(steps).with_behavior_probs(probs).with_state_trace(states);
    h.terminal_observation = Some(terminal);
    Ok(h)
}

/// `R(h)` under `spec`; reads only the rewards.
pub fn compute_return(h: &History, spec: &ReturnSpec) -> Result<f64> {
    let required = spec.num_steps();
    if h.len() < required {
        return Err(Error::HistoryTooShort { len: h.len(), required });
    }
    let rewards = h.steps[..required].iter().map(|s| s.reward);
    Ok(match *spec {
        ReturnSpec::FiniteHorizon { .. } => rewards.sum(),
        ReturnSpec::Discounted { gamma, .. } => {
            let mut discount = 1.0;
            let mut total = 0.0;
            for r in rewards {
                total += discount * r;
                discount *= gamma;
            }
            total
        }
    })
}

/// Outcome of [`truncation_horizon`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub horizon: usize,
    /// Set when `eps >= R_max`, in which case no rewards are needed.
    pub trivial: bool,
}

/// Smallest `T` with `gamma^T * R_max <= eps`, where
/// `R_max = r_max / (1 - gamma)`.
pub fn truncation_horizon(gamma: f64, eps: f64, r_max: f64) -> Result<Truncation> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::input("gamma", format!("must be in (0,1), got {gamma}")));
    }
    if !(eps > 0.0) {
        return Err(Error::input("eps", format!("must be positive, got {eps}")));
    }
    if !(r_max > 0.0) {
        return Err(Error::input("r_max", format!("must be positive, got {r_max}")));
    }
    let bound = r_max / (1.0 - gamma);
    if eps >= bound {
        return Ok(Truncation {
            horizon: 0,
            trivial: true,
        });
    }
    let mut t = ((eps / bound).ln() / gamma.ln()).ceil().max(0.0) as usize;
    // log rounding can land one step off in either direction
    while t > 0 && gamma.powi(t as i32 - 1) * bound <= eps {
        t -= 1;
    }
    while gamma.powi(t as i32) * bound > eps {
        t += 1;
    }
    Ok(Truncation {
        horizon: t,
        trivial: false,
    })
}
