use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const ROW_TOLERANCE: f64 = 1e-12;

/// A tabular partially observable Markov decision process.
///
/// Tables are indexed `transition[s][a][s']`, `observation_fn[s][o]` and
/// `reward[s][a]`. Rewards are deterministic functions of the state-action
/// pair and bounded in magnitude by `r_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pomdp {
    pub num_states: usize,
    pub num_observations: usize,
    pub num_actions: usize,
    pub initial_dist: Vec<f64>,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub observation_fn: Vec<Vec<f64>>,
    pub reward: Vec<Vec<f64>>,
    pub r_max: f64,
}

/// Check one probability row: correct length, nonnegative, sums to one.
pub(crate) fn check_row(row: &[f64], len: usize, name: &str) -> std::result::Result<(), String> {
    if row.len() != len {
        return Err(format!("{name} has {} entries, expected {len}", row.len()));
    }
    if let Some((i, p)) = row.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
        return Err(format!("{name}[{i}] = {p} is not a probability"));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_TOLERANCE {
        return Err(format!("{name}: row sum {sum}"));
    }
    Ok(())
}

impl Pomdp {
    /// Returns normally iff every table has the declared shape, every
    /// probability row is a distribution and every reward is within `r_max`.
    /// The error names the first offending row.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.num_states == 0 || self.num_observations == 0 || self.num_actions == 0 {
            return bad("num_states, num_observations and num_actions must be positive".into());
        }
        if !(self.r_max.is_finite() && self.r_max >= 0.0) {
            return bad(format!("r_max = {} must be finite and nonnegative", self.r_max));
        }
        check_row(&self.initial_dist, self.num_states, "initial_dist").or_else(bad)?;

        if self.transition.len() != self.num_states {
            return bad(format!(
                "transition has {} state rows, expected {}",
                self.transition.len(),
                self.num_states
            ));
        }
        for (s, per_action) in self.transition.iter().enumerate() {
            if per_action.len() != self.num_actions {
                return bad(format!(
                    "transition[{s}] has {} action rows, expected {}",
                    per_action.len(),
                    self.num_actions
                ));
            }
            for (a, row) in per_action.iter().enumerate() {
                check_row(row, self.num_states, &format!("transition[{s}][{a}]")).or_else(bad)?;
            }
        }

        if self.observation_fn.len() != self.num_states {
            return bad(format!(
                "observation_fn has {} rows, expected {}",
                self.observation_fn.len(),
                self.num_states
            ));
        }
        for (s, row) in self.observation_fn.iter().enumerate() {
            check_row(row, self.num_observations, &format!("observation_fn[{s}]")).or_else(bad)?;
        }

        if self.reward.len() != self.num_states {
            return bad(format!(
                "reward has {} rows, expected {}",
                self.reward.len(),
                self.num_states
            ));
        }
        for (s, row) in self.reward.iter().enumerate() {
            if row.len() != self.num_actions {
                return bad(format!(
                    "reward[{s}] has {} entries, expected {}",
                    row.len(),
                    self.num_actions
                ));
            }
            for (a, r) in row.iter().enumerate() {
                if !r.is_finite() || r.abs() > self.r_max {
                    return bad(format!("reward[{s}][{a}] = {r} exceeds r_max = {}", self.r_max));
                }
            }
        }
        Ok(())
    }

    /// Checks that a policy over `observations` x `actions` fits this model.
    pub fn check_policy_dims(&self, observations: usize, actions: usize) -> Result<()> {
        if observations != self.num_observations || actions != self.num_actions {
            return Err(Error::DimensionMismatch(format!(
                "policy is over {observations} observations x {actions} actions, model has {} x {}",
                self.num_observations, self.num_actions
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> Pomdp {
        Pomdp {
            num_states: 2,
            num_observations: 1,
            num_actions: 1,
            initial_dist: vec![0.5, 0.5],
            transition: vec![vec![vec![0.5, 0.5]], vec![vec![0.5, 0.5]]],
            observation_fn: vec![vec![1.0], vec![1.0]],
            reward: vec![vec![1.0], vec![0.0]],
            r_max: 1.0,
        }
    }

    #[test]
    fn accepts_valid_rows() {
        two_state().validate().unwrap();
    }

    #[test]
    fn rejects_row_sum() {
        let mut m = two_state();
        m.transition[1][0] = vec![0.6, 0.6];
        let err = m.validate().unwrap_err().to_string();
        assert!(err.contains("row sum 1.2"), "{err}");
        assert!(err.contains("transition[1][0]"), "{err}");
    }

    #[test]
    fn rejects_reward_above_bound() {
        let mut m = two_state();
        m.reward[0][0] = 5.0;
        m.r_max = 4.0;
        let err = m.validate().unwrap_err().to_string();
        assert!(err.contains("reward[0][0]"), "{err}");
    }

    #[test]
    fn rejects_negative_entry() {
        let mut m = two_state();
        m.initial_dist = vec![1.5, -0.5];
        assert!(m.validate().is_err());
    }

    #[test]
    fn rejects_wrong_shape() {
        let mut m = two_state();
        m.observation_fn.pop();
        assert!(matches!(m.validate(), Err(Error::InvalidModel(_))));
    }
}
