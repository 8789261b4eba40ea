//! Off-policy value estimation for tabular POMDPs.
//!
//! Histories gathered under one behavior policy are reweighted by likelihood
//! ratios to estimate the value of any other policy. Because the environment
//! factors of `Pr(h | pi)` cancel, the ratio only needs the action
//! probabilities, so estimation never touches the model. The crate also
//! computes the deviation radii and sample sizes that make those estimates
//! trustworthy uniformly over a policy class, with exhaustive enumeration
//! oracles to check everything at desk scale.
//!
//! Modules:
//!
//! - [`pomdp`]: models, simulation, returns, enumeration.
//! - [`policy`]: floored stochastic policies, classes, distance, covering numbers.
//! - [`estimators`]: crude, IS, WIS and mixture estimators plus exact moments.
//! - [`bounds`]: Bernstein, uniform-convergence and regret-based bounds, SRM.
//! - [`experiments`]: the two-stage pipeline and coverage/comparison studies.
//! - [`io`], [`report`], [`cli`]: file formats and the command-line front end.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod io;
pub mod numeric;
pub mod policy;
pub mod pomdp;
pub mod report;
pub mod seed;

pub use error::{Error, Result};
