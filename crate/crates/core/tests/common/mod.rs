#![allow(dead_code)]

use pomdp_ope::policy::{ContextMap, Policy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random row over `actions` actions with every entry at least `floor`.
pub fn random_row(rng: &mut impl Rng, actions: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..actions).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let scale = 1.0 - actions as f64 * floor;
    let mut row: Vec<f64> = raw.iter().map(|x| floor + scale * x / total).collect();
    // put the rounding residue on the largest entry so the row sums to 1
    let residue = 1.0 - row.iter().sum::<f64>();
    let big = (0..actions).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
    row[big] += residue;
    row
}

pub fn random_policy(rng: &mut impl Rng, observations: usize, actions: usize, window: usize, floor: f64) -> Policy {
    let contexts = ContextMap {
        num_observations: observations,
        window,
    }
    .len();
    let rows = (0..contexts).map(|_| random_row(rng, actions, floor)).collect();
    if window == 1 {
        Policy::tabular(rows, floor).unwrap()
    } else {
        Policy::finite_window(observations, window, rows, floor).unwrap()
    }
}

/// `count` (target, behavior) pairs over the default 2 x 2 shape. Targets
/// alternate between reactive and two-step-window policies; behaviors keep
/// a floor of 0.1.
pub fn random_pairs(seed: u64, count: usize) -> Vec<(Policy, Policy)> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let window = if i % 2 == 0 { 1 } else { 2 };
            let target = random_policy(&mut r, 2, 2, window, 0.0).with_id(format!("target{i}"));
            let behavior = random_policy(&mut r, 2, 2, 1, 0.1).with_id(format!("behavior{i}"));
            (target, behavior)
        })
        .collect()
}
