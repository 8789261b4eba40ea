use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ratio_ceiling, ExperimentConfig};
use crate::bounds::{single_policy_epsilon, uniform_epsilon, BoundInputs};
use crate::error::Result;
use crate::estimators::{is_estimate, SampleSet};
use crate::policy::EntropyProfile;
use crate::pomdp::exact_value;
use crate::seed::derive_seed;

/// Sup-over-class part of a coverage run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCoverage {
    /// `max_j |V_hat(pi_j) - V(pi_j)|` per replication.
    pub sup_deviations: Vec<f64>,
    pub epsilon: f64,
    pub eta: f64,
    pub violation_count: usize,
    pub empirical_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    /// `|V_hat - V|` per replication, in replication order.
    pub deviations: Vec<f64>,
    pub exact_value: f64,
    pub epsilon: f64,
    pub v_max: f64,
    pub eta: f64,
    pub violation_count: usize,
    /// `violation_count / M`.
    pub empirical_rate: f64,
    /// The confidence level the bound promises, `delta`.
    pub bound_rate: f64,
    pub class: Option<ClassCoverage>,
}

fn count_above(xs: &[f64], eps: f64) -> usize {
    xs.iter().filter(|&&d| d > eps).count()
}

/// Runs `M` independent `N`-sample importance-sampling estimates and counts
/// how often the deviation exceeds the bound's radius.
///
/// Replication `r` draws its histories from master seed
/// `derive_seed(master_seed, r)`. The single-policy radius is the deviation
/// bound at `delta` in the configured variant unless `epsilon` overrides it.
/// With a class, every member is estimated from the same histories and the
/// largest deviation is compared against the uniform radius.
pub fn coverage_experiment(config: &ExperimentConfig) -> Result<CoverageResult> {
    config.validate()?;
    let v_max = config.v_max();
    let steps = config.spec.num_steps();
    let exact = exact_value(&config.model, &config.target, &config.spec)?;
    let eta = match config.eta {
        Some(e) => e,
        None => ratio_ceiling(&[&config.target], &config.behavior, steps)?,
    };
    let inputs = BoundInputs {
        v_max,
        eta,
        delta: config.delta,
        horizon: config.spec.horizon(),
        entropy: EntropyProfile::Constant { log_n: 0.0 },
        vc_dim: None,
        c_floor: config.target.floor(),
    };
    let epsilon = match config.epsilon {
        Some(e) => e,
        None => single_policy_epsilon(&inputs, config.n as u64, config.variant)?,
    };

    let members = config.class.as_ref().map(|c| c.members()).unwrap_or(&[]);
    let member_values = members
        .iter()
        .map(|p| exact_value(&config.model, p, &config.spec))
        .collect::<Result<Vec<_>>>()?;

    let per_rep = (0..config.m as u64)
        .into_par_iter()
        .map(|r| {
            let samples = SampleSet::simulate(
                &config.model,
                &config.behavior,
                &config.spec,
                config.n,
                derive_seed(config.master_seed, r),
            )?;
            let dev = (is_estimate(&samples, &config.target)?.value - exact).abs();
            let mut sup: f64 = 0.0;
            for (p, v) in members.iter().zip(&member_values) {
                sup = sup.max((is_estimate(&samples, p)?.value - v).abs());
            }
            Ok((dev, sup))
        })
        .collect::<Result<Vec<_>>>()?;

    let deviations: Vec<f64> = per_rep.iter().map(|x| x.0).collect();
    let violation_count = count_above(&deviations, epsilon);
    let m = config.m as f64;

    let class = match &config.class {
        None => None,
        Some(cls) => {
            let refs: Vec<_> = cls.members().iter().collect();
            let class_eta = match config.eta {
                Some(e) => e,
                None => ratio_ceiling(&refs, &config.behavior, steps)?,
            };
            let class_inputs = BoundInputs {
                eta: class_eta,
                entropy: EntropyProfile::exact(cls)?,
                c_floor: cls.floor(),
                ..inputs.clone()
            };
            let eps = uniform_epsilon(&class_inputs, config.n as u64, &|r| class_inputs.covering(r))?;
            let sup_deviations: Vec<f64> = per_rep.iter().map(|x| x.1).collect();
            let count = count_above(&sup_deviations, eps);
            Some(ClassCoverage {
                sup_deviations,
                epsilon: eps,
                eta: class_eta,
                violation_count: count,
                empirical_rate: count as f64 / m,
            })
        }
    };

    Ok(CoverageResult {
        deviations,
        exact_value: exact,
        epsilon,
        v_max,
        eta,
        violation_count,
        empirical_rate: violation_count as f64 / m,
        bound_rate: config.delta,
        class,
    })
}

/// Median of `xs` (mean of the two middle values for even length).
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_radius_is_always_violated() {
        let cfg = ExperimentConfig {
            n: 20,
            m: 30,
            epsilon: Some(0.0),
            class: None,
            ..ExperimentConfig::default_instance(11)
        };
        let res = coverage_experiment(&cfg).unwrap();
        assert_eq!(res.violation_count, 30);
        assert_eq!(res.empirical_rate, 1.0);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
