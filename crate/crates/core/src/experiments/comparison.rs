use rayon::prelude::*;

use crate::bounds::{
    kearns_sample_size, mcdiarmid_sample_size, parametric_sample_size, srm_select, uniform_sample_size, BoundInputs,
    SrmCandidate,
};
use crate::error::{Error, Result};
use crate::estimators::{
    crude_estimate, crude_variance_exact, eta_bound, is_estimate, is_variance_exact, mixture_is_estimate, wis_estimate,
    EstimatorKind, MixtureComponent, SampleSet,
};
use crate::io::{BoundGrid, FORMAT_VERSION};
use crate::numeric::{mean, ols_slope, sample_variance};
use crate::policy::{EntropyProfile, Policy};
use crate::pomdp::{exact_value, Pomdp, ReturnSpec};
use crate::report::{BoundComparisonRow, EstimatorComparisonRow, SlopeRow};
use crate::seed::derive_seed;

/// Inputs of [`estimator_comparison`].
#[derive(Debug, Clone)]
pub struct ComparisonConfig {
    pub model: Pomdp,
    pub behavior: Policy,
    /// Second behavior for the mixture estimator; the mixture column is
    /// omitted without it.
    pub second_behavior: Option<Policy>,
    pub target: Policy,
    pub spec: ReturnSpec,
    pub schedule: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
}

/// Replicated bias and variance of the crude (on-policy), IS, WIS and
/// mixture estimators for every sample size in the schedule.
///
/// Replication `r` at schedule position `k` uses base seed
/// `b = derive_seed(derive_seed(master, k), r)`; crude draws from
/// `derive_seed(b, 0)`, IS and WIS share `derive_seed(b, 1)`, and the mixture
/// draws `n / 2` histories from each behavior with `derive_seed(b, 2)` and
/// `derive_seed(b, 3)`, priors proportional to the set sizes.
pub fn estimator_comparison(config: &ComparisonConfig) -> Result<Vec<EstimatorComparisonRow>> {
    if config.replications < 2 {
        return Err(Error::input("replications", "at least 2 needed for a variance"));
    }
    if config.schedule.is_empty() || config.schedule.contains(&0) {
        return Err(Error::input("n_schedule", "sample sizes must be positive"));
    }
    let (model, spec, target) = (&config.model, &config.spec, &config.target);
    let exact = exact_value(model, target, spec)?;
    let mut rows = Vec::new();
    for (k, &n) in config.schedule.iter().enumerate() {
        let stream = derive_seed(config.master_seed, k as u64);
        let mixture_sizes = (n / 2, n - n / 2);
        let use_mixture = config.second_behavior.is_some() && mixture_sizes.0 > 0;
        let reps = (0..config.replications as u64)
            .into_par_iter()
            .map(|r| {
                let base = derive_seed(stream, r);
                let on_policy = SampleSet::simulate(model, target, spec, n, derive_seed(base, 0))?;
                let off = SampleSet::simulate(model, &config.behavior, spec, n, derive_seed(base, 1))?;
                let mut out = vec![
                    crude_estimate(&on_policy.returns)?.value,
                    is_estimate(&off, target)?.value,
                    wis_estimate(&off, target)?.value,
                ];
                if let (true, Some(second)) = (use_mixture, &config.second_behavior) {
                    let a = SampleSet::simulate(model, &config.behavior, spec, mixture_sizes.0, derive_seed(base, 2))?;
                    let b = SampleSet::simulate(model, second, spec, mixture_sizes.1, derive_seed(base, 3))?;
                    let comps = [
                        MixtureComponent {
                            samples: &a,
                            behavior: &config.behavior,
                            prior: mixture_sizes.0 as f64 / n as f64,
                        },
                        MixtureComponent {
                            samples: &b,
                            behavior: second,
                            prior: mixture_sizes.1 as f64 / n as f64,
                        },
                    ];
                    out.push(mixture_is_estimate(&comps, target)?.value);
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;

        let kinds = [
            (
                EstimatorKind::Crude,
                Some(crude_variance_exact(model, target, spec, n)?),
            ),
            (
                EstimatorKind::Is,
                Some(is_variance_exact(model, target, &config.behavior, spec, n)?),
            ),
            (EstimatorKind::Wis, None),
            (EstimatorKind::Mixture, None),
        ];
        for (col, (kind, predicted)) in kinds.into_iter().enumerate() {
            if col == 3 && !use_mixture {
                continue;
            }
            let values: Vec<f64> = reps.iter().map(|v| v[col]).collect();
            let m = mean(&values);
            let var = sample_variance(&values);
            rows.push(EstimatorComparisonRow {
                format_version: FORMAT_VERSION,
                estimator: kind.as_str().into(),
                n,
                replications: config.replications,
                exact_value: exact,
                mean: m,
                bias: m - exact,
                variance: var,
                mean_std_error: (var / values.len() as f64).sqrt(),
                predicted_variance: predicted,
                master_seed: config.master_seed,
            });
        }
    }
    Ok(rows)
}

/// Grid rows plus one slope fit per `(horizon, delta)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundComparison {
    pub rows: Vec<BoundComparisonRow>,
    pub slopes: Vec<SlopeRow>,
}

/// Evaluates the uniform-convergence sample size (exact constants) next to
/// the trajectory-tree, bounded-differences and parametric formulas (unit
/// constants) on every grid point, with `v_max = 1` and `eps = 1 / ratio`.
///
/// `eta` is the ratio bound of a class with floor `c_floor` against the
/// uniform behavior. Slopes are least-squares fits of `log N` against
/// `log(v_max / eps)`.
pub fn bound_comparison(grid: &BoundGrid) -> Result<BoundComparison> {
    if grid.horizons.is_empty() || grid.ratios.len() < 2 || grid.deltas.is_empty() {
        return Err(Error::input(
            "bound_grid",
            "need horizons, deltas and at least two ratios",
        ));
    }
    let cells: Vec<(usize, f64)> = grid
        .horizons
        .iter()
        .flat_map(|&t| grid.deltas.iter().map(move |&d| (t, d)))
        .collect();
    let per_cell = cells
        .par_iter()
        .map(|&(t, delta)| {
            let eta = eta_bound(t, grid.c_floor, grid.num_actions)?;
            let inputs = BoundInputs {
                v_max: 1.0,
                eta,
                delta,
                horizon: t,
                entropy: EntropyProfile::Constant {
                    log_n: grid.log_covering,
                },
                vc_dim: Some(grid.vc_dim),
                c_floor: grid.c_floor,
            };
            let mut rows = Vec::with_capacity(grid.ratios.len());
            for &ratio in &grid.ratios {
                let eps = 1.0 / ratio;
                rows.push(BoundComparisonRow {
                    format_version: FORMAT_VERSION,
                    horizon: t,
                    v_max_over_eps: ratio,
                    delta,
                    log_covering: grid.log_covering,
                    vc_dim: grid.vc_dim,
                    c_floor: grid.c_floor,
                    eta,
                    k1: grid.k1,
                    uniform_n: uniform_sample_size(&inputs, eps, &|r| inputs.covering(r))?,
                    kearns_n: kearns_sample_size(ratio, t, grid.vc_dim, delta)?,
                    mcdiarmid_n: mcdiarmid_sample_size(&inputs, eps)?,
                    parametric_n: parametric_sample_size(1.0, eps, grid.k1, grid.log_covering, delta, t)?,
                });
            }
            let x: Vec<f64> = grid.ratios.iter().map(|r| r.ln()).collect();
            let fit = |f: &dyn Fn(&BoundComparisonRow) -> f64| {
                let y: Vec<f64> = rows.iter().map(|r| f(r).ln()).collect();
                ols_slope(&x, &y)
            };
            let slope = SlopeRow {
                format_version: FORMAT_VERSION,
                horizon: t,
                delta,
                ratio_min: grid.ratios.iter().copied().fold(f64::INFINITY, f64::min),
                ratio_max: grid.ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                uniform_slope: fit(&|r| r.uniform_n as f64),
                kearns_slope: fit(&|r| r.kearns_n),
                mcdiarmid_slope: fit(&|r| r.mcdiarmid_n),
                parametric_slope: fit(&|r| r.parametric_n),
            };
            Ok((rows, slope))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = BoundComparison {
        rows: Vec::new(),
        slopes: Vec::new(),
    };
    for (rows, slope) in per_cell {
        out.rows.extend(rows);
        out.slopes.push(slope);
    }
    Ok(out)
}

/// Largest `n` searched by [`srm_threshold`].
pub const SRM_SCAN_LIMIT: u64 = 1 << 40;

/// Index chosen by [`srm_select`] at every `n` in `ns`.
pub fn srm_scan(classes: &[SrmCandidate], delta: f64, shared: &BoundInputs, ns: &[u64]) -> Result<Vec<usize>> {
    ns.iter()
        .map(|&n| Ok(srm_select(classes, n, delta, shared)?.chosen_index))
        .collect()
}

/// Smallest sample size at which the selection leaves class 0, found by
/// doubling then bisection. Returns `None` if class 0 is still chosen at
/// [`SRM_SCAN_LIMIT`].
///
/// Assumes a single switch, as when class 0 has the smallest entropy and
/// every radius shrinks with `n`.
pub fn srm_threshold(classes: &[SrmCandidate], delta: f64, shared: &BoundInputs) -> Result<Option<u64>> {
    let chosen = |n: u64| -> Result<usize> { Ok(srm_select(classes, n, delta, shared)?.chosen_index) };
    if chosen(1)? != 0 {
        return Ok(Some(1));
    }
    let mut lo = 1;
    let mut hi = 2;
    while chosen(hi)? == 0 {
        if hi >= SRM_SCAN_LIMIT {
            return Ok(None);
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if chosen(mid)? == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}
