//! The sup-log distance between policies, internal covering numbers and
//! metric-entropy profiles.

use serde::{Deserialize, Serialize};

use super::{Policy, PolicyClass};
use crate::error::{Error, Result};

/// Classes up to this size are covered exactly by subset search.
pub const DEFAULT_EXACT_COVER_LIMIT: usize = 20;

/// `max |log p(a|c) - log q(a|c)|` over the given contexts and all actions.
///
/// Returns `f64::INFINITY` when one policy gives an action zero probability
/// and the other does not. Entries where both are zero contribute nothing.
pub fn policy_distance(p: &Policy, q: &Policy, contexts: &[Vec<usize>]) -> Result<f64> {
    if p.num_observations() != q.num_observations() || p.num_actions() != q.num_actions() {
        return Err(Error::DimensionMismatch(format!(
            "{} x {} vs {} x {}",
            p.num_observations(),
            p.num_actions(),
            q.num_observations(),
            q.num_actions()
        )));
    }
    let mut d: f64 = 0.0;
    for ctx in contexts {
        let (dp, dq) = (p.action_distribution(ctx)?, q.action_distribution(ctx)?);
        for (&a, &b) in dp.iter().zip(dq) {
            if a == b {
                continue;
            }
            if a == 0.0 || b == 0.0 {
                return Ok(f64::INFINITY);
            }
            d = d.max((a.ln() - b.ln()).abs());
        }
    }
    Ok(d)
}

/// Result of [`covering_number`]: the number of closed balls, the indices of
/// the chosen centers, and whether the count is the exact minimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Covering {
    pub count: usize,
    pub centers: Vec<usize>,
    pub exact: bool,
}

fn distance_matrix(cls: &PolicyClass) -> Result<Vec<Vec<f64>>> {
    let m = cls.members();
    let n = m.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = policy_distance(&m[i], &m[j], cls.contexts())?;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    Ok(d)
}

/// Minimal number of radius-`eps` balls centered at class members that
/// cover the class. Exact for classes of at most
/// [`DEFAULT_EXACT_COVER_LIMIT`] members, greedy (an upper bound) beyond.
pub fn covering_number(cls: &PolicyClass, eps: f64) -> Result<Covering> {
    covering_number_with_limit(cls, eps, DEFAULT_EXACT_COVER_LIMIT)
}

/// [`covering_number`] with the exact search limited to `exact_limit` members.
pub fn covering_number_with_limit(cls: &PolicyClass, eps: f64, exact_limit: usize) -> Result<Covering> {
    if cls.is_empty() {
        return Err(Error::Empty("policy class"));
    }
    if !(eps > 0.0) {
        return Err(Error::input("eps", format!("must be positive, got {eps}")));
    }
    let d = distance_matrix(cls)?;
    let balls: Vec<Vec<usize>> = d
        .iter()
        .map(|row| (0..row.len()).filter(|&j| row[j] <= eps).collect())
        .collect();
    if cls.len() <= exact_limit.min(63) {
        Ok(exact_cover(&balls))
    } else {
        Ok(greedy_cover(&balls))
    }
}

fn exact_cover(balls: &[Vec<usize>]) -> Covering {
    let n = balls.len();
    let masks: Vec<u64> = balls
        .iter()
        .map(|b| b.iter().fold(0u64, |m, &j| m | (1 << j)))
        .collect();
    let full: u64 = if n == 64 { u64::MAX } else { (1 << n) - 1 };
    for k in 1..=n {
        let mut chosen = Vec::with_capacity(k);
        if search(&masks, full, 0, k, &mut chosen) {
            return Covering {
                count: k,
                centers: chosen,
                exact: true,
            };
        }
    }
    unreachable!("every member covers itself")
}

fn search(masks: &[u64], full: u64, covered: u64, left: usize, chosen: &mut Vec<usize>) -> bool {
    if covered == full {
        return true;
    }
    if left == 0 {
        return false;
    }
    // the lowest uncovered member must lie in one of the chosen balls
    let target = (!covered & full).trailing_zeros();
    for (i, &mask) in masks.iter().enumerate() {
        if mask & (1 << target) == 0 {
            continue;
        }
        chosen.push(i);
        if search(masks, full, covered | mask, left - 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn greedy_cover(balls: &[Vec<usize>]) -> Covering {
    let n = balls.len();
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut centers = Vec::new();
    while remaining > 0 {
        let (best, _) = balls
            .iter()
            .enumerate()
            .map(|(i, b)| (i, b.iter().filter(|&&j| !covered[j]).count()))
            .max_by(|x, y| x.1.cmp(&y.1).then(y.0.cmp(&x.0)))
            .expect("nonempty class");
        for &j in &balls[best] {
            if !covered[j] {
                covered[j] = true;
                remaining -= 1;
            }
        }
        centers.push(best);
    }
    Covering {
        count: centers.len(),
        centers,
        exact: false,
    }
}

/// `log` of the covering number.
pub fn metric_entropy(cls: &PolicyClass, eps: f64) -> Result<f64> {
    Ok((covering_number(cls, eps)?.count as f64).ln())
}

/// How the metric entropy `log N(eps)` of a class behaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EntropyProfile {
    /// `(eps_i, log N_i)` pairs with `eps_i` strictly decreasing.
    Tabulated { points: Vec<(f64, f64)> },
    /// `log N(eps) = k1 log(k2 sqrt(T) / eps)`, clamped at zero.
    Parametric { k1: f64, k2: f64 },
    /// Radius-independent entropy, e.g. a finite class counted without
    /// regard to geometry.
    Constant { log_n: f64 },
}

impl EntropyProfile {
    /// Tabulate the exact covering numbers of `cls` on a radius grid.
    pub fn from_class(cls: &PolicyClass, radii: &[f64]) -> Result<Self> {
        let mut radii = radii.to_vec();
        radii.sort_by(|a, b| b.total_cmp(a));
        radii.dedup();
        let points = radii
            .into_iter()
            .map(|r| Ok((r, metric_entropy(cls, r)?)))
            .collect::<Result<Vec<_>>>()?;
        let profile = EntropyProfile::Tabulated { points };
        profile.validate()?;
        Ok(profile)
    }

    /// Exact profile of a finite class.
    ///
    /// Internal covering numbers only change at pairwise distances, so
    /// tabulating every distinct positive distance plus half the smallest one
    /// makes [`EntropyProfile::log_covering`] exact at every radius.
    pub fn exact(cls: &PolicyClass) -> Result<Self> {
        let m = cls.members();
        let mut radii = Vec::new();
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                let d = policy_distance(&m[i], &m[j], cls.contexts())?;
                if d.is_infinite() {
                    return Err(Error::InfiniteCovering(d));
                }
                if d > 0.0 {
                    radii.push(d);
                }
            }
        }
        let smallest = radii.iter().copied().fold(f64::INFINITY, f64::min);
        if smallest.is_finite() {
            radii.push(smallest / 2.0);
        } else {
            radii.push(1.0);
        }
        Self::from_class(cls, &radii)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EntropyProfile::Tabulated { points } => {
                if points.is_empty() {
                    return Err(Error::Empty("entropy table"));
                }
                for (i, w) in points.windows(2).enumerate() {
                    if !(w[1].0 < w[0].0) {
                        return Err(Error::input(
                            format!("points[{}]", i + 1),
                            "radii must be strictly decreasing",
                        ));
                    }
                    if w[1].1 < w[0].1 {
                        return Err(Error::input(
                            format!("points[{}]", i + 1),
                            "entropy must not decrease as the radius shrinks",
                        ));
                    }
                }
                if let Some((i, _)) = points.iter().enumerate().find(|(_, p)| !(p.0 > 0.0) || !(p.1 >= 0.0)) {
                    return Err(Error::input(
                        format!("points[{i}]"),
                        "radius must be positive and entropy nonnegative",
                    ));
                }
            }
            EntropyProfile::Parametric { k1, k2 } => {
                if !(*k1 > 0.0 && *k2 > 0.0) {
                    return Err(Error::input("entropy", "k1 and k2 must be positive"));
                }
            }
            EntropyProfile::Constant { log_n } => {
                if !(*log_n >= 0.0 && log_n.is_finite()) {
                    return Err(Error::input("entropy.log_n", "must be finite and nonnegative"));
                }
            }
        }
        Ok(())
    }

    /// `log N(eps)` at horizon `horizon`.
    ///
    /// Tabulated profiles use the entry with the largest radius not above
    /// `eps` (a valid upper bound since covering numbers shrink as the radius
    /// grows); below the smallest tabulated radius the last entry is used.
    pub fn log_covering(&self, eps: f64, horizon: usize) -> f64 {
        match self {
            EntropyProfile::Tabulated { points } => points
                .iter()
                .find(|(r, _)| *r <= eps)
                .or(points.last())
                .map_or(0.0, |p| p.1),
            EntropyProfile::Parametric { k1, k2 } => (k1 * (k2 * (horizon as f64).sqrt() / eps).ln()).max(0.0),
            EntropyProfile::Constant { log_n } => *log_n,
        }
    }
}

/// `max(0, k1 log(k2 sqrt(T) / eps))` for a parametric profile.
pub fn parametric_entropy(profile: &EntropyProfile, horizon: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::input("eps", format!("must be positive, got {eps}")));
    }
    match profile {
        EntropyProfile::Parametric { .. } => {
            profile.validate()?;
            Ok(profile.log_covering(eps, horizon))
        }
        _ => Err(Error::input("entropy", "expected a parametric profile")),
    }
}
