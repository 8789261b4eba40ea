use serde::{Deserialize, Serialize};

use super::Policy;
use crate::error::{Error, Result};

/// A finite collection of policies sharing dimensions and floor, together
/// with the contexts over which distances are measured.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyClass {
    members: Vec<Policy>,
    floor: f64,
    contexts: Vec<Vec<usize>>,
}

impl PolicyClass {
    /// Builds a class whose context space is every context of the member
    /// with the longest window.
    pub fn new(members: Vec<Policy>) -> Result<Self> {
        let widest = members
            .iter()
            .max_by_key(|p| p.window())
            .ok_or(Error::Empty("policy class"))?;
        let contexts = widest.context_map().all();
        Self::with_contexts(members, contexts)
    }

    pub fn with_contexts(members: Vec<Policy>, contexts: Vec<Vec<usize>>) -> Result<Self> {
        let first = members.first().ok_or(Error::Empty("policy class"))?;
        if contexts.is_empty() {
            return Err(Error::Empty("context space"));
        }
        let (obs, acts, floor) = (first.num_observations(), first.num_actions(), first.floor());
        for (i, p) in members.iter().enumerate() {
            if p.num_observations() != obs || p.num_actions() != acts {
                return Err(Error::DimensionMismatch(format!(
                    "class member {i} is {} x {}, member 0 is {obs} x {acts}",
                    p.num_observations(),
                    p.num_actions()
                )));
            }
            if p.floor() != floor {
                return Err(Error::InvalidPolicy(format!(
                    "class member {i} has floor {}, member 0 has {floor}",
                    p.floor()
                )));
            }
        }
        for ctx in &contexts {
            first.action_distribution(ctx)?;
        }
        Ok(PolicyClass {
            members,
            floor,
            contexts,
        })
    }

    pub fn members(&self) -> &[Policy] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    pub fn num_actions(&self) -> usize {
        self.members[0].num_actions()
    }

    pub fn num_observations(&self) -> usize {
        self.members[0].num_observations()
    }
}

/// Smallest action probability over every member, context and action.
pub fn class_floor(cls: &PolicyClass) -> Result<f64> {
    let mut min = f64::INFINITY;
    for p in cls.members() {
        for ctx in cls.contexts() {
            for &q in p.action_distribution(ctx)? {
                min = min.min(q);
            }
        }
    }
    Ok(min)
}

/// One swept logit coordinate of a [`SoftmaxGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub context: usize,
    pub action: usize,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl GridAxis {
    fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        (0..self.steps)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// A softmax family evaluated on the Cartesian product of its axes.
/// Logits not named by an axis are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoftmaxGrid {
    pub num_observations: usize,
    pub num_actions: usize,
    #[serde(default = "one")]
    pub window: usize,
    pub floor: f64,
    pub axes: Vec<GridAxis>,
}

fn one() -> usize {
    1
}

impl SoftmaxGrid {
    /// Members in row-major order over the axes (last axis fastest).
    pub fn policies(&self) -> Result<Vec<Policy>> {
        let map = super::ContextMap {
            num_observations: self.num_observations,
            window: self.window,
        };
        for (i, axis) in self.axes.iter().enumerate() {
            if axis.context >= map.len() || axis.action >= self.num_actions {
                return Err(Error::input(format!("axes[{i}]"), "context or action out of range"));
            }
            if axis.steps == 0 {
                return Err(Error::input(format!("axes[{i}].steps"), "must be positive"));
            }
        }
        let grids: Vec<Vec<f64>> = self.axes.iter().map(GridAxis::values).collect();
        let total: usize = grids.iter().map(Vec::len).product();
        let mut out = Vec::with_capacity(total);
        for mut code in 0..total {
            let mut logits = vec![vec![0.0; self.num_actions]; map.len()];
            let mut tag = Vec::with_capacity(self.axes.len());
            for (axis, values) in self.axes.iter().zip(&grids).rev() {
                let v = values[code % values.len()];
                code /= values.len();
                logits[axis.context][axis.action] = v;
                tag.push(format!("{v}"));
            }
            tag.reverse();
            let p = Policy::softmax(self.num_observations, self.window, logits, self.floor)?;
            out.push(p.with_id(format!("grid[{}]", tag.join(","))));
        }
        Ok(out)
    }

    pub fn class(&self) -> Result<PolicyClass> {
        PolicyClass::new(self.policies()?)
    }
}
