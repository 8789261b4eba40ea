//! Stochastic observation-conditional policies, policy classes, the
//! log-probability distance between policies and covering numbers.

mod class;
mod covering;

pub use class::{class_floor, GridAxis, PolicyClass, SoftmaxGrid};
pub use covering::{
    covering_number, covering_number_with_limit, metric_entropy, parametric_entropy, policy_distance, Covering,
    EntropyProfile, DEFAULT_EXACT_COVER_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pomdp::{check_row, History};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Conditions on the current observation only.
    TabularReactive,
    /// Logits per context, mixed with the uniform floor.
    SoftmaxParametric,
    /// Conditions on the last `window` observations.
    FiniteWindow,
}

/// Maps an observation window to a row index.
///
/// Contexts are the most recent `min(t, window)` observations, so early
/// steps see shorter windows. Windows of length `l` occupy a contiguous
/// block after all shorter ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextMap {
    pub num_observations: usize,
    pub window: usize,
}

impl ContextMap {
    pub fn len(&self) -> usize {
        (1..=self.window).map(|l| self.num_observations.pow(l as u32)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the context seen after `observations` (oldest first).
    pub fn index(&self, observations: &[usize]) -> Result<usize> {
        if observations.is_empty() {
            return Err(Error::input("context", "empty observation window"));
        }
        let start = observations.len().saturating_sub(self.window);
        let ctx = &observations[start..];
        let mut offset = 0;
        for l in 1..ctx.len() {
            offset += self.num_observations.pow(l as u32);
        }
        let mut idx = 0;
        for &o in ctx {
            if o >= self.num_observations {
                return Err(Error::input(
                    "context",
                    format!(
                        "observation {o} out of range (num_observations = {})",
                        self.num_observations
                    ),
                ));
            }
            idx = idx * self.num_observations + o;
        }
        Ok(offset + idx)
    }

    /// Every context, in index order.
    pub fn all(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.len());
        for l in 1..=self.window {
            let count = self.num_observations.pow(l as u32);
            for mut code in 0..count {
                let mut ctx = vec![0; l];
                for slot in ctx.iter_mut().rev() {
                    *slot = code % self.num_observations;
                    code /= self.num_observations;
                }
                out.push(ctx);
            }
        }
        out
    }
}

/// On-disk form of a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: PolicyKind,
    pub num_observations: usize,
    pub num_actions: usize,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub floor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<Vec<f64>>>,
}

fn default_window() -> usize {
    1
}

/// A stochastic policy whose every action probability is at least `floor`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    id: String,
    kind: PolicyKind,
    contexts: ContextMap,
    num_actions: usize,
    floor: f64,
    table: Vec<Vec<f64>>,
    params: Option<Vec<Vec<f64>>>,
}

impl Policy {
    /// Reactive policy from one probability row per observation.
    pub fn tabular(rows: Vec<Vec<f64>>, floor: f64) -> Result<Self> {
        let num_observations = rows.len();
        let num_actions = rows.first().map_or(0, Vec::len);
        Self::build(
            PolicyKind::TabularReactive,
            ContextMap {
                num_observations,
                window: 1,
            },
            num_actions,
            floor,
            rows,
            None,
        )
    }

    /// Window policy; `rows` are indexed as in [`ContextMap::index`].
    pub fn finite_window(num_observations: usize, window: usize, rows: Vec<Vec<f64>>, floor: f64) -> Result<Self> {
        let num_actions = rows.first().map_or(0, Vec::len);
        Self::build(
            PolicyKind::FiniteWindow,
            ContextMap {
                num_observations,
                window,
            },
            num_actions,
            floor,
            rows,
            None,
        )
    }

    /// Softmax over `logits[context][action]`, projected onto the floor by
    /// `p = (1 - |A| c) softmax + c`.
    pub fn softmax(num_observations: usize, window: usize, logits: Vec<Vec<f64>>, floor: f64) -> Result<Self> {
        let num_actions = logits.first().map_or(0, Vec::len);
        check_floor(floor, num_actions)?;
        let scale = 1.0 - num_actions as f64 * floor;
        let table = logits
            .iter()
            .map(|row| {
                let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = row.iter().map(|x| (x - max).exp()).collect();
                let z: f64 = exps.iter().sum();
                exps.iter().map(|e| scale * (e / z) + floor).collect()
            })
            .collect();
        Self::build(
            PolicyKind::SoftmaxParametric,
            ContextMap {
                num_observations,
                window,
            },
            num_actions,
            floor,
            table,
            Some(logits),
        )
    }

    /// Uniform reactive policy; its floor is `1 / num_actions`.
    pub fn uniform(num_observations: usize, num_actions: usize) -> Self {
        let p = 1.0 / num_actions as f64;
        Policy {
            id: "uniform".into(),
            kind: PolicyKind::TabularReactive,
            contexts: ContextMap {
                num_observations,
                window: 1,
            },
            num_actions,
            floor: p,
            table: vec![vec![p; num_actions]; num_observations],
            params: None,
        }
    }

    fn build(
        kind: PolicyKind,
        contexts: ContextMap,
        num_actions: usize,
        floor: f64,
        table: Vec<Vec<f64>>,
        params: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if contexts.num_observations == 0 || num_actions == 0 || contexts.window == 0 {
            return Err(Error::InvalidPolicy(
                "observations, actions and window must be positive".into(),
            ));
        }
        check_floor(floor, num_actions)?;
        if table.len() != contexts.len() {
            return Err(Error::InvalidPolicy(format!(
                "table: {} rows for {} contexts",
                table.len(),
                contexts.len()
            )));
        }
        for (i, row) in table.iter().enumerate() {
            check_row(row, num_actions, &format!("table[{i}]")).map_err(Error::InvalidPolicy)?;
            if let Some((a, p)) = row.iter().enumerate().find(|(_, p)| **p < floor) {
                return Err(Error::InvalidPolicy(format!(
                    "table[{i}][{a}] = {p} is below the floor {floor}"
                )));
            }
        }
        Ok(Policy {
            id: "policy".into(),
            kind,
            contexts,
            num_actions,
            floor,
            table,
            params,
        })
    }

    pub fn from_spec(spec: PolicySpec) -> Result<Self> {
        let policy = match spec.kind {
            PolicyKind::SoftmaxParametric => {
                let params = spec
                    .params
                    .ok_or_else(|| Error::InvalidPolicy("softmax_parametric needs `params`".into()))?;
                Self::softmax(spec.num_observations, spec.window, params, spec.floor)?
            }
            kind => {
                let table = spec
                    .table
                    .ok_or_else(|| Error::InvalidPolicy("tabular policies need `table`".into()))?;
                if kind == PolicyKind::TabularReactive && spec.window != 1 {
                    return Err(Error::InvalidPolicy("tabular_reactive requires window 1".into()));
                }
                Self::build(
                    kind,
                    ContextMap {
                        num_observations: spec.num_observations,
                        window: spec.window,
                    },
                    spec.num_actions,
                    spec.floor,
                    table,
                    None,
                )?
            }
        };
        if policy.num_actions != spec.num_actions {
            return Err(Error::InvalidPolicy(format!(
                "rows have {} actions, num_actions is {}",
                policy.num_actions, spec.num_actions
            )));
        }
        Ok(match spec.id {
            Some(id) => policy.with_id(id),
            None => policy,
        })
    }

    pub fn to_spec(&self) -> PolicySpec {
        let softmax = self.kind == PolicyKind::SoftmaxParametric;
        PolicySpec {
            format_version: None,
            id: Some(self.id.clone()),
            kind: self.kind,
            num_observations: self.contexts.num_observations,
            num_actions: self.num_actions,
            window: self.contexts.window,
            floor: self.floor,
            table: (!softmax).then(|| self.table.clone()),
            params: if softmax { self.params.clone() } else { None },
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn num_observations(&self) -> usize {
        self.contexts.num_observations
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn window(&self) -> usize {
        self.contexts.window
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn context_map(&self) -> ContextMap {
        self.contexts
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.table
    }

    /// Action probabilities after the observations seen so far (oldest
    /// first); only the trailing window is consulted.
    pub fn action_distribution(&self, observations: &[usize]) -> Result<&[f64]> {
        let idx = self.contexts.index(observations)?;
        Ok(&self.table[idx])
    }

    /// `log Pr(h_a | pi)`: the summed log-probabilities of the actions in
    /// `h`. Returns `-inf` if some action has probability zero.
    pub fn log_prob_actions(&self, h: &History) -> Result<f64> {
        if h.is_empty() {
            return Err(Error::Empty("history"));
        }
        let observations = h.observations();
        let mut total = 0.0;
        for (t, step) in h.steps.iter().enumerate() {
            let dist = self.action_distribution(&observations[..=t])?;
            let p = *dist
                .get(step.action)
                .ok_or_else(|| Error::input("history", format!("action {} out of range at step {t}", step.action)))?;
            total += p.ln();
        }
        Ok(total)
    }
}

fn check_floor(floor: f64, num_actions: usize) -> Result<()> {
    let max = if num_actions == 0 {
        1.0
    } else {
        1.0 / num_actions as f64
    };
    if !(floor >= 0.0 && floor <= max) {
        return Err(Error::InvalidPolicy(format!(
            "floor {floor} outside [0, 1/|A|] = [0, {max}]"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pomdp::Step;

    fn history(obs_actions: &[(usize, usize)]) -> History {
        History::new(
            obs_actions
                .iter()
                .map(|&(o, a)| Step {
                    observation: o,
                    action: a,
                    reward: 0.0,
                })
                .collect(),
        )
    }

    #[test]
    fn tabular_lookup() {
        let p = Policy::tabular(vec![vec![0.8, 0.2]], 0.0).unwrap();
        assert_eq!(p.action_distribution(&[0]).unwrap(), &[0.8, 0.2]);
    }

    #[test]
    fn zero_logits_are_uniform() {
        let p = Policy::softmax(1, 1, vec![vec![0.0, 0.0]], 0.0).unwrap();
        assert_eq!(p.action_distribution(&[0]).unwrap(), &[0.5, 0.5]);
    }

    #[test]
    fn softmax_floor_caps_extreme_rows() {
        let p = Policy::softmax(1, 1, vec![vec![500.0, -500.0]], 0.1).unwrap();
        let d = p.action_distribution(&[0]).unwrap();
        assert!(d[0] <= 0.9);
        assert!((d[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_context() {
        let p = Policy::uniform(2, 2);
        assert!(p.action_distribution(&[2]).is_err());
    }

    #[test]
    fn floor_violation_rejected() {
        assert!(Policy::tabular(vec![vec![0.95, 0.05]], 0.1).is_err());
        assert!(Policy::tabular(vec![vec![0.5, 0.5]], 0.6).is_err());
    }

    #[test]
    fn log_prob_of_consistent_deterministic_policy_is_zero() {
        let p = Policy::tabular(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 0.0).unwrap();
        let h = history(&[(0, 0), (1, 1), (0, 0)]);
        assert_eq!(p.log_prob_actions(&h).unwrap(), 0.0);
    }

    #[test]
    fn log_prob_uniform_binary() {
        let p = Policy::uniform(1, 2);
        let h = history(&[(0, 0), (0, 1), (0, 1)]);
        assert!((p.log_prob_actions(&h).unwrap() - 3.0 * 0.5_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn log_prob_zero_action_is_negative_infinity() {
        let p = Policy::tabular(vec![vec![1.0, 0.0]], 0.0).unwrap();
        let h = history(&[(0, 1)]);
        assert_eq!(p.log_prob_actions(&h).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn context_map_indexes_every_window_once() {
        let m = ContextMap {
            num_observations: 3,
            window: 2,
        };
        let all = m.all();
        assert_eq!(all.len(), 12);
        for (i, ctx) in all.iter().enumerate() {
            assert_eq!(m.index(ctx).unwrap(), i);
        }
        // only the trailing window counts
        assert_eq!(m.index(&[2, 0, 1]).unwrap(), m.index(&[0, 1]).unwrap());
    }

    #[test]
    fn window_policy_uses_recent_observations() {
        let m = ContextMap {
            num_observations: 2,
            window: 2,
        };
        let mut rows = vec![vec![0.5, 0.5]; m.len()];
        rows[m.index(&[1, 0]).unwrap()] = vec![0.9, 0.1];
        let p = Policy::finite_window(2, 2, rows, 0.0).unwrap();
        assert_eq!(p.action_distribution(&[0, 1, 0]).unwrap(), &[0.9, 0.1]);
        assert_eq!(p.action_distribution(&[0]).unwrap(), &[0.5, 0.5]);
    }

    #[test]
    fn spec_round_trip() {
        let p = Policy::softmax(2, 1, vec![vec![0.3, -0.2], vec![1.0, 0.0]], 0.05)
            .unwrap()
            .with_id("s");
        let back = Policy::from_spec(p.to_spec()).unwrap();
        assert_eq!(p, back);
    }
}
