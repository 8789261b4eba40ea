//! Minimax-regret bound on the log-likelihood ratio through the metric
//! entropy of the class:
//!
//! ```text
//! R_T <= inf_{eps > 0} ( log N(eps) + 24 * integral_0^eps sqrt(log N(tau)) dtau )
//! ```

use crate::error::{Error, Result};

/// Search settings for [`regret_bound_with`].
#[derive(Debug, Clone, Copy)]
pub struct RegretSearch {
    /// Absolute tolerance for each quadrature.
    pub tolerance: f64,
    /// Smallest radius on the search grid.
    pub eps_min: f64,
    /// Radii above this are never searched.
    pub eps_ceiling: f64,
    pub points_per_decade: usize,
}

impl Default for RegretSearch {
    fn default() -> Self {
        RegretSearch {
            tolerance: 1e-9,
            eps_min: 1e-12,
            eps_ceiling: 1e6,
            points_per_decade: 20,
        }
    }
}

/// Value of the minimized objective and where it was attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretBound {
    pub value: f64,
    pub argmin: f64,
}

/// Upper limit of the substituted integration variable: `tau = eps e^{-u}`.
const U_MAX: f64 = 60.0;
const MAX_DEPTH: u32 = 48;

/// `integral_0^eps sqrt(entropy(tau)) dtau`, computed as
/// `eps * integral_0^inf e^{-u} sqrt(entropy(eps e^{-u})) du` with adaptive
/// Simpson on `u in [0, 60]`.
pub fn entropy_integral(entropy: &dyn Fn(f64) -> f64, eps: f64, tolerance: f64) -> Result<f64> {
    let f = |u: f64| {
        let tau = eps * (-u).exp();
        let h = entropy(tau);
        if h.is_nan() || h < 0.0 {
            f64::NAN
        } else {
            eps * (-u).exp() * h.sqrt()
        }
    };
    let tail = f(U_MAX);
    if !tail.is_finite() || tail > tolerance {
        return Err(Error::NonIntegrable(format!(
            "integrand near zero radius is {tail:.3e} at radius {:.3e}",
            eps * (-U_MAX).exp()
        )));
    }
    let (a, b) = (0.0, U_MAX);
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let v = simpson(&f, a, b, fa, fm, fb, whole, tolerance, MAX_DEPTH);
    if !v.is_finite() {
        return Err(Error::NonIntegrable("integrand is not finite".into()));
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn objective(entropy: &dyn Fn(f64) -> f64, eps: f64, tolerance: f64) -> Result<f64> {
    Ok(entropy(eps) + 24.0 * entropy_integral(entropy, eps, tolerance)?)
}

/// [`regret_bound_with`] using default search settings and the given
/// quadrature tolerance.
pub fn regret_bound(entropy: &dyn Fn(f64) -> f64, tolerance: f64) -> Result<f64> {
    let search = RegretSearch {
        tolerance,
        ..RegretSearch::default()
    };
    Ok(regret_bound_with(entropy, &search)?.value)
}

/// Minimizes the objective over a logarithmic radius grid, then refines the
/// best bracket by golden-section search in `log eps`.
///
/// The grid stops at the first radius where the entropy vanishes (the
/// objective is constant beyond it) or at `eps_ceiling`.
pub fn regret_bound_with(entropy: &dyn Fn(f64) -> f64, search: &RegretSearch) -> Result<RegretBound> {
    if !(search.tolerance > 0.0 && search.eps_min > 0.0 && search.eps_ceiling > search.eps_min) {
        return Err(Error::input("regret_search", "invalid tolerance or radius range"));
    }
    let mut top = 1.0_f64.max(search.eps_min * 10.0);
    while entropy(top) > 0.0 && top < search.eps_ceiling {
        top *= 2.0;
    }
    let top = top.min(search.eps_ceiling);

    let (lo, hi) = (search.eps_min.ln(), top.ln());
    let decades = (hi - lo) / std::f64::consts::LN_10;
    let n = ((decades * search.points_per_decade as f64).ceil() as usize).max(2);
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();

    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid {
        values.push(objective(entropy, x.exp(), search.tolerance)?);
    }
    let (mut best_i, mut best) = (0, values[0]);
    for (i, &v) in values.iter().enumerate() {
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut argmin = grid[best_i];

    // golden section on [grid[i-1], grid[i+1]], keeping the best value seen
    let (mut a, mut b) = (grid[best_i.saturating_sub(1)], grid[(best_i + 1).min(n)]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(entropy, c.exp(), search.tolerance)?;
    let mut fd = objective(entropy, d.exp(), search.tolerance)?;
    for _ in 0..80 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(entropy, c.exp(), search.tolerance)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(entropy, d.exp(), search.tolerance)?;
        }
        for (x, v) in [(c, fc), (d, fd)] {
            if v < best {
                best = v;
                argmin = x;
            }
        }
    }
    Ok(RegretBound {
        value: best,
        argmin: argmin.exp(),
    })
}

/// `e^{R_T}`, the likelihood-ratio ceiling achieved by the minimax sampler.
pub fn eta_from_regret(regret: f64) -> Result<f64> {
    if !(regret >= 0.0) {
        return Err(Error::input("regret", format!("must be nonnegative, got {regret}")));
    }
    Ok(regret.exp())
}

/// Leading-order regret `(k1 / 2) log T` of a parametric class; the
/// `o(log T)` remainder is dropped.
pub fn parametric_regret(k1: f64, horizon: usize) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::input("horizon", "must be at least 1"));
    }
    if !(k1 > 0.0) {
        return Err(Error::input("k1", "must be positive"));
    }
    Ok(0.5 * k1 * (horizon as f64).ln())
}
