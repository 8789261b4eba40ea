//! Experiment harness: the two-stage sample-then-estimate pipeline,
//! coverage experiments for the deviation bounds, estimator comparisons and
//! bound comparison tables.
//!
//! Replications run in parallel; results are collected in replication order
//! and every random stream is derived from one master seed with
//! [`derive_seed`](crate::seed::derive_seed), so outputs do not depend on
//! scheduling.

mod comparison;
mod coverage;

pub use comparison::{bound_comparison, estimator_comparison, BoundComparison, ComparisonConfig, SRM_SCAN_LIMIT};
pub use comparison::{srm_scan, srm_threshold};
pub use coverage::{coverage_experiment, median, ClassCoverage, CoverageResult};

use std::path::Path;

use crate::bounds::FormulaVariant;
use crate::error::{Error, Result};
use crate::estimators::{crude_estimate, is_estimate, wis_estimate, Estimate, EstimatorKind, SampleSet};
use crate::io::{load_dataset, write_dataset};
use crate::policy::{ContextMap, GridAxis, Policy, PolicyClass, SoftmaxGrid};
use crate::pomdp::{Pomdp, ReturnSpec};

/// Small enumerable test bed: 2 states, 2 observations, 2 actions,
/// horizon 4, uniform behavior and an 8-member softmax class with floor 0.1.
#[derive(Debug, Clone)]
pub struct Instance {
    pub model: Pomdp,
    pub spec: ReturnSpec,
    pub behavior: Policy,
    pub class: PolicyClass,
    pub floor: f64,
}

pub const DEFAULT_HORIZON: usize = 4;
pub const DEFAULT_FLOOR: f64 = 0.1;

pub fn default_model() -> Pomdp {
    Pomdp {
        num_states: 2,
        num_observations: 2,
        num_actions: 2,
        initial_dist: vec![0.6, 0.4],
        transition: vec![
            vec![vec![0.9, 0.1], vec![0.2, 0.8]],
            vec![vec![0.3, 0.7], vec![0.6, 0.4]],
        ],
        observation_fn: vec![vec![0.8, 0.2], vec![0.25, 0.75]],
        reward: vec![vec![1.0, 0.0], vec![0.2, 0.7]],
        r_max: 1.0,
    }
}

/// The default model with every reward shifted to be strictly positive,
/// for the zero-variance sampling oracle.
pub fn positive_reward_model() -> Pomdp {
    Pomdp {
        reward: vec![vec![1.0, 0.3], vec![0.2, 0.7]],
        ..default_model()
    }
}

pub fn default_grid() -> SoftmaxGrid {
    SoftmaxGrid {
        num_observations: 2,
        num_actions: 2,
        window: 1,
        floor: DEFAULT_FLOOR,
        axes: vec![
            GridAxis {
                context: 0,
                action: 0,
                lo: -2.0,
                hi: 2.0,
                steps: 2,
            },
            GridAxis {
                context: 1,
                action: 0,
                lo: -2.0,
                hi: 2.0,
                steps: 2,
            },
            GridAxis {
                context: 0,
                action: 1,
                lo: 0.0,
                hi: 1.0,
                steps: 2,
            },
        ],
    }
}

pub fn default_instance() -> Instance {
    let class = default_grid().class().expect("default grid is valid");
    Instance {
        model: default_model(),
        spec: ReturnSpec::FiniteHorizon {
            horizon: DEFAULT_HORIZON,
            r_max: 1.0,
        },
        behavior: Policy::uniform(2, 2),
        class,
        floor: DEFAULT_FLOOR,
    }
}

/// `(max over contexts and actions of target / behavior)^steps`, a bound on
/// the likelihood ratio of any `steps`-step history for every target.
///
/// With a uniform behavior and targets that reach `1 - (|A| - 1) c` this
/// equals [`eta_bound`](crate::estimators::eta_bound).
pub fn ratio_ceiling(targets: &[&Policy], behavior: &Policy, steps: usize) -> Result<f64> {
    let window = targets
        .iter()
        .map(|p| p.window())
        .chain([behavior.window()])
        .max()
        .unwrap_or(1);
    let contexts = ContextMap {
        num_observations: behavior.num_observations(),
        window,
    }
    .all();
    let mut worst: f64 = 1.0;
    for t in targets {
        if t.num_observations() != behavior.num_observations() || t.num_actions() != behavior.num_actions() {
            return Err(Error::DimensionMismatch(format!(
                "target {} and behavior {} differ in shape",
                t.id(),
                behavior.id()
            )));
        }
        for ctx in &contexts {
            let p = t.action_distribution(ctx)?;
            let q = behavior.action_distribution(ctx)?;
            for (a, (&pa, &qa)) in p.iter().zip(q).enumerate() {
                if pa > 0.0 && qa == 0.0 {
                    return Err(Error::input(
                        "behavior",
                        format!("action {a} has zero behavior probability in context {ctx:?}"),
                    ));
                }
                if pa > 0.0 {
                    worst = worst.max(pa / qa);
                }
            }
        }
    }
    Ok(worst.powi(steps as i32))
}

/// Everything a single experiment run needs, already loaded.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: Pomdp,
    pub behavior: Policy,
    pub target: Policy,
    pub class: Option<PolicyClass>,
    pub spec: ReturnSpec,
    /// Samples per replication.
    pub n: usize,
    /// Replications.
    pub m: usize,
    /// Radius override; by default it comes from the deviation bound.
    pub epsilon: Option<f64>,
    pub delta: f64,
    pub master_seed: u64,
    pub variant: FormulaVariant,
    /// Return bound; defaults to [`ReturnSpec::return_bound`].
    pub v_max: Option<f64>,
    /// Likelihood-ratio bound; defaults to [`ratio_ceiling`].
    pub eta: Option<f64>,
}

impl ExperimentConfig {
    /// Default instance, target = first class member, N = 200, M = 1000,
    /// delta = 0.1.
    pub fn default_instance(master_seed: u64) -> Self {
        let inst = default_instance();
        ExperimentConfig {
            target: inst.class.members()[0].clone(),
            model: inst.model,
            behavior: inst.behavior,
            class: Some(inst.class),
            spec: inst.spec,
            n: 200,
            m: 1000,
            epsilon: None,
            delta: 0.1,
            master_seed,
            variant: FormulaVariant::PaperForm,
            v_max: None,
            eta: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.spec.validate()?;
        if self.n == 0 {
            return Err(Error::input("n", "must be at least 1"));
        }
        if self.m == 0 {
            return Err(Error::input("replications", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::input("delta", format!("must be in (0, 1), got {}", self.delta)));
        }
        if let Some(eps) = self.epsilon {
            if !(eps >= 0.0) {
                return Err(Error::input("epsilon", format!("must be nonnegative, got {eps}")));
            }
        }
        self.model
            .check_policy_dims(self.behavior.num_observations(), self.behavior.num_actions())?;
        self.model
            .check_policy_dims(self.target.num_observations(), self.target.num_actions())?;
        Ok(())
    }

    pub fn v_max(&self) -> f64 {
        self.v_max.unwrap_or_else(|| self.spec.return_bound())
    }
}

/// Output of the sampling stage. Estimation reads only the persisted
/// sample set, never the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub samples: SampleSet,
}

impl Pipeline {
    /// Loads a dataset written by an earlier sampling stage.
    pub fn load(path: &Path) -> Result<Self> {
        Ok(Pipeline {
            samples: load_dataset(path)?,
        })
    }

    /// Answers a value query. `Crude` ignores `target` and averages the
    /// stored returns, which is only meaningful on-policy.
    pub fn estimate(&self, target: &Policy, kind: EstimatorKind) -> Result<Estimate> {
        match kind {
            EstimatorKind::Crude => crude_estimate(&self.samples.returns),
            EstimatorKind::Is => is_estimate(&self.samples, target),
            EstimatorKind::Wis => wis_estimate(&self.samples, target),
            EstimatorKind::Mixture => Err(Error::input(
                "estimator",
                "the mixture estimator needs several datasets",
            )),
        }
    }
}

/// Sampling stage: `n` histories under the behavior policy, persisted to
/// `dataset` when given.
pub fn run_pipeline(config: &ExperimentConfig, dataset: Option<&Path>) -> Result<Pipeline> {
    config.validate()?;
    let samples = SampleSet::simulate(
        &config.model,
        &config.behavior,
        &config.spec,
        config.n,
        config.master_seed,
    )?;
    if let Some(path) = dataset {
        write_dataset(path, &samples)?;
    }
    Ok(Pipeline { samples })
}
