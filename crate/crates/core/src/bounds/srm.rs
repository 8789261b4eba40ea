use serde::{Deserialize, Serialize};

use super::{uniform_epsilon, BoundInputs};
use crate::error::{Error, Result};
use crate::policy::EntropyProfile;

/// A policy class competing in structural risk minimization: its entropy
/// profile and the best estimated value found inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SrmCandidate {
    pub id: String,
    pub entropy: EntropyProfile,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrmSelection {
    pub chosen: String,
    pub chosen_index: usize,
    pub epsilons: Vec<f64>,
    pub lower_bounds: Vec<f64>,
    /// `delta / |classes|`, the confidence given to each class.
    pub delta_per_class: f64,
}

/// Picks the class with the highest pessimistic value `V_hat - eps_i`,
/// where `eps_i` is the uniform radius of class `i` at `n` samples and
/// confidence `delta / |classes|`.
///
/// Ties go to the class with the smaller entropy at its own radius, then to
/// the earlier class. `shared` supplies `v_max`, `eta` and the horizon; its
/// own `delta` and `entropy` are ignored.
pub fn srm_select(classes: &[SrmCandidate], n: u64, delta: f64, shared: &BoundInputs) -> Result<SrmSelection> {
    if classes.is_empty() {
        return Err(Error::Empty("class list"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::input("delta", format!("must be in (0, 1), got {delta}")));
    }
    let delta_i = delta / classes.len() as f64;
    let mut epsilons = Vec::with_capacity(classes.len());
    let mut lower_bounds = Vec::with_capacity(classes.len());
    let mut entropies = Vec::with_capacity(classes.len());
    for c in classes {
        let inputs = BoundInputs {
            delta: delta_i,
            entropy: c.entropy.clone(),
            ..shared.clone()
        };
        let eps = uniform_epsilon(&inputs, n, &|r| inputs.covering(r))?;
        epsilons.push(eps);
        lower_bounds.push(c.estimate - eps);
        entropies.push(c.entropy.log_covering(eps / 8.0, shared.horizon));
    }
    let mut best = 0;
    for i in 1..classes.len() {
        let better = lower_bounds[i] > lower_bounds[best]
            || (lower_bounds[i] == lower_bounds[best] && entropies[i] < entropies[best]);
        if better {
            best = i;
        }
    }
    Ok(SrmSelection {
        chosen: classes[best].id.clone(),
        chosen_index: best,
        epsilons,
        lower_bounds,
        delta_per_class: delta_i,
    })
}
