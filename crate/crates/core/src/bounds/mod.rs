//! Deviation and sample-complexity bounds for likelihood-ratio estimators.
//!
//! Two quantities drive every bound: `v_max`, a bound on returns, and
//! `eta`, a bound on the likelihood ratio. A single importance-sampling term
//! then satisfies `|R w| <= v_max * eta` and the estimator variance is at
//! most `v_max^2 (eta - 1) / N`. Plugging both into Bernstein's inequality
//! gives the single-policy tail
//!
//! ```text
//! Pr(|V - V_hat| > eps) <= 2 exp( -1/2 * eps^2 N / (v_max^2 (eta - 1) / N + v_max eta eps) )
//! ```
//!
//! and its union-bounded counterpart over a class with covering number
//! `N(eps / 8)`:
//!
//! ```text
//! 8 N(eps/8) exp( -1/128 * eps^2 N / (v_max^2 (eta - 1) / N + v_max eta eps / 8) )
//! ```
//!
//! The uniform form carries explicit constants and is solved exactly. The
//! comparison formulas (`kearns_sample_size`, `mcdiarmid_sample_size`,
//! `parametric_sample_size`) are order-of-magnitude expressions and are
//! evaluated with every hidden constant set to one.

mod regret;
mod srm;

pub use regret::{
    entropy_integral, eta_from_regret, parametric_regret, regret_bound, regret_bound_with, RegretBound, RegretSearch,
};
pub use srm::{srm_select, SrmCandidate, SrmSelection};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::EntropyProfile;

/// Which algebraic form produced a reported value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaVariant {
    /// The closed form exactly as published, with `log(1/delta)`.
    PaperForm,
    /// The exact root of the two-sided tail, with `log(2/delta)`.
    ExactForm,
    /// A big-O expression evaluated with unit constant.
    BigOUnitConstant,
}

impl FormulaVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            FormulaVariant::PaperForm => "paper_form",
            FormulaVariant::ExactForm => "exact_form",
            FormulaVariant::BigOUnitConstant => "big_o_unit_constant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Epsilon,
    SampleSize,
    Regret,
    Eta,
    Tail,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::Epsilon => "epsilon",
            Quantity::SampleSize => "sample_size",
            Quantity::Regret => "regret",
            Quantity::Eta => "eta",
            Quantity::Tail => "tail",
        }
    }
}

/// Shared inputs of the bound calculators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub v_max: f64,
    pub eta: f64,
    pub delta: f64,
    pub horizon: usize,
    pub entropy: EntropyProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vc_dim: Option<u64>,
    #[serde(default)]
    pub c_floor: f64,
}

impl BoundInputs {
    /// Checks `v_max > 0`, `eta >= 1`, `0 < delta <= 1` and a valid entropy
    /// profile. `delta = 1` is admitted as the degenerate no-confidence case.
    pub fn validate(&self) -> Result<()> {
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(Error::input("v_max", format!("must be positive, got {}", self.v_max)));
        }
        if !(self.eta >= 1.0 && self.eta.is_finite()) {
            return Err(Error::input("eta", format!("must be at least 1, got {}", self.eta)));
        }
        check_delta(self.delta, true)?;
        if !(self.c_floor >= 0.0 && self.c_floor <= 1.0) {
            return Err(Error::input(
                "c_floor",
                format!("must be in [0, 1], got {}", self.c_floor),
            ));
        }
        self.entropy.validate()
    }

    /// `N(eps)` implied by the entropy profile.
    pub fn covering(&self, eps: f64) -> f64 {
        self.entropy.log_covering(eps, self.horizon).exp()
    }

    fn variance_term(&self) -> f64 {
        self.v_max * self.v_max * (self.eta - 1.0)
    }
}

fn check_delta(delta: f64, allow_one: bool) -> Result<()> {
    let ok = delta > 0.0 && (delta < 1.0 || (allow_one && delta == 1.0));
    if !ok {
        let range = if allow_one { "(0, 1]" } else { "(0, 1)" };
        return Err(Error::input("delta", format!("must be in {range}, got {delta}")));
    }
    Ok(())
}

/// A computed bound with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub quantity: Quantity,
    pub value: f64,
    pub variant: FormulaVariant,
    pub inputs: BoundInputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// Bernstein's two-sided tail `2 exp(-1/2 eps^2 n / (L + a eps))`, clamped
/// to `[0, 1]`.
pub fn bernstein_tail(eps: f64, n: u64, variance_bound: f64, magnitude_bound: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::input("eps", format!("must be positive, got {eps}")));
    }
    if n == 0 {
        return Err(Error::input("n", "must be positive"));
    }
    if !(variance_bound >= 0.0) {
        return Err(Error::input("variance_bound", "must be nonnegative"));
    }
    if !(magnitude_bound > 0.0) {
        return Err(Error::input("magnitude_bound", "must be positive"));
    }
    let n = n as f64;
    let exponent = -0.5 * eps * eps * n / (variance_bound + magnitude_bound * eps);
    Ok((2.0 * exponent.exp()).clamp(0.0, 1.0))
}

/// Single-policy deviation radius
/// `eps = (v_max / N) (b eta + sqrt(2 b (eta - 1) + b^2 eta^2))`.
///
/// `PaperForm` takes `b = log(1/delta)`; `ExactForm` takes `b = log(2/delta)`,
/// which is the exact solution of the two-sided Bernstein tail set equal to
/// `delta`. `PaperForm` therefore certifies confidence `1 - 2 delta`.
pub fn single_policy_epsilon(inputs: &BoundInputs, n: u64, variant: FormulaVariant) -> Result<f64> {
    inputs.validate()?;
    if n == 0 {
        return Err(Error::input("n", "must be positive"));
    }
    let b = match variant {
        FormulaVariant::PaperForm => (1.0 / inputs.delta).ln(),
        FormulaVariant::ExactForm => (2.0 / inputs.delta).ln(),
        FormulaVariant::BigOUnitConstant => {
            return Err(Error::input("variant", "single-policy radius has no big-O form"))
        }
    };
    let eta = inputs.eta;
    let root = (2.0 * b * (eta - 1.0) + b * b * eta * eta).sqrt();
    Ok(inputs.v_max / n as f64 * (b * eta + root))
}

/// The uniform-convergence failure probability at radius `eps` with `n`
/// samples and covering number `covering` (taken at `eps / 8`).
pub fn uniform_tail(inputs: &BoundInputs, eps: f64, n: u64, covering: f64) -> f64 {
    let n = n as f64;
    let denom = inputs.variance_term() / n + inputs.v_max * inputs.eta * eps / 8.0;
    8.0 * covering * (-(eps * eps * n / denom) / 128.0).exp()
}

/// Log-space test of `uniform_tail <= delta`, robust to underflow.
fn uniform_holds(inputs: &BoundInputs, eps: f64, n: u64, covering: f64) -> bool {
    if n == 0 {
        return 8.0 * covering <= inputs.delta;
    }
    let n = n as f64;
    let exponent = eps * eps * n * n / (128.0 * (inputs.variance_term() + inputs.v_max * inputs.eta * eps * n / 8.0));
    (8.0 * covering).ln() - exponent <= inputs.delta.ln()
}

fn log_confidence_term(covering: f64, delta: f64) -> Result<f64> {
    if !covering.is_finite() {
        return Err(Error::InfiniteCovering(f64::NAN));
    }
    if !(covering >= 1.0) {
        return Err(Error::input("covering", format!("must be at least 1, got {covering}")));
    }
    Ok(128.0 * (8.0 * covering / delta).ln())
}

/// Smallest `N` for which the uniform tail over the class is at most
/// `delta`.
///
/// Writing `A = v_max^2 (eta - 1)`, `B = v_max eta eps / 8` and
/// `c0 = 128 log(8 N(eps/8) / delta)`, the condition is the quadratic
/// `eps^2 N^2 - c0 B N - c0 A >= 0`, whose positive root is rounded up and
/// then checked against the inequality itself.
pub fn uniform_sample_size(inputs: &BoundInputs, eps: f64, covering_fn: &dyn Fn(f64) -> f64) -> Result<u64> {
    inputs.validate()?;
    check_delta(inputs.delta, false)?;
    if !(eps > 0.0) {
        return Err(Error::input("eps", format!("must be positive, got {eps}")));
    }
    let covering = covering_fn(eps / 8.0);
    if !covering.is_finite() {
        return Err(Error::InfiniteCovering(eps / 8.0));
    }
    let c0 = log_confidence_term(covering, inputs.delta)?;
    let a = inputs.variance_term();
    let b = inputs.v_max * inputs.eta * eps / 8.0;
    let root = (c0 * b + (c0 * c0 * b * b + 4.0 * eps * eps * c0 * a).sqrt()) / (2.0 * eps * eps);
    if !(root < u64::MAX as f64 / 2.0) {
        return Err(Error::input("eps", "sample size overflows"));
    }
    let mut n = (root.ceil() as u64).max(1);
    while !uniform_holds(inputs, eps, n, covering) {
        n += 1;
    }
    while n > 1 && uniform_holds(inputs, eps, n - 1, covering) {
        n -= 1;
    }
    Ok(n)
}

const FIXED_POINT_TOL: f64 = 1e-10;
const FIXED_POINT_ITERS: usize = 100;

/// Radius certified for the whole class by `n` samples.
///
/// Iterates `eps <- root(N(eps / 8))`, where `root` solves the uniform tail
/// at equality for a fixed covering number, until successive radii differ by
/// at most `1e-10`. Radius-independent covering numbers converge after one
/// update.
pub fn uniform_epsilon(inputs: &BoundInputs, n: u64, covering_fn: &dyn Fn(f64) -> f64) -> Result<f64> {
    inputs.validate()?;
    check_delta(inputs.delta, false)?;
    if n == 0 {
        return Err(Error::input("n", "must be positive"));
    }
    let nf = n as f64;
    let a = inputs.variance_term();
    let root_for = |covering: f64| -> Result<f64> {
        let c0 = log_confidence_term(covering, inputs.delta)?;
        let lin = c0 * inputs.v_max * inputs.eta * nf / 8.0;
        Ok((lin + (lin * lin + 4.0 * nf * nf * c0 * a).sqrt()) / (2.0 * nf * nf))
    };
    let mut eps = inputs.v_max * inputs.eta;
    let mut last_change = f64::INFINITY;
    for _ in 0..FIXED_POINT_ITERS {
        let covering = covering_fn(eps / 8.0);
        if !covering.is_finite() {
            return Err(Error::InfiniteCovering(eps / 8.0));
        }
        let next = root_for(covering)?;
        last_change = (next - eps).abs();
        eps = next;
        if last_change <= FIXED_POINT_TOL {
            // nudge past rounding so the inequality holds at the returned radius
            for _ in 0..64 {
                if uniform_holds(inputs, eps, n, covering_fn(eps / 8.0)) {
                    break;
                }
                eps = eps * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE;
            }
            return Ok(eps);
        }
    }
    Err(Error::NonConvergence {
        iterations: FIXED_POINT_ITERS,
        last_change,
    })
}

/// Order-of-magnitude sample size for the trajectory-tree method,
/// `(v_max/eps)^2 2^{2T} VC log(T) (T + log(v_max/eps) + log(1/delta))`,
/// unit constant.
pub fn kearns_sample_size(v_max_over_eps: f64, horizon: usize, vc: u64, delta: f64) -> Result<f64> {
    if horizon < 2 {
        return Err(Error::input("horizon", "must be at least 2 so that log T > 0"));
    }
    if !(v_max_over_eps > 0.0) {
        return Err(Error::input("v_max_over_eps", "must be positive"));
    }
    if vc == 0 {
        return Err(Error::input("vc_dim", "must be positive"));
    }
    check_delta(delta, true)?;
    let t = horizon as f64;
    Ok(v_max_over_eps.powi(2)
        * 4f64.powi(horizon as i32)
        * vc as f64
        * t.ln()
        * (t + v_max_over_eps.ln() + (1.0 / delta).ln()))
}

/// Bounded-differences sample size
/// `(v_max/eps)^2 2^{2T} (1 - c)^{2T} (K + log(1/delta))`, unit constant.
/// `K` is the entropy profile evaluated at `eps`.
pub fn mcdiarmid_sample_size(inputs: &BoundInputs, eps: f64) -> Result<f64> {
    inputs.validate()?;
    if !(eps > 0.0) {
        return Err(Error::input("eps", format!("must be positive, got {eps}")));
    }
    let t = inputs.horizon as i32;
    let k = inputs.entropy.log_covering(eps, inputs.horizon);
    Ok((inputs.v_max / eps).powi(2)
        * 4f64.powi(t)
        * (1.0 - inputs.c_floor).powi(2 * t)
        * (k + (1.0 / inputs.delta).ln()))
}

/// Parametric-class sample size `(v_max/eps) T^{k1/2} (K + log(1/delta))`,
/// unit constant.
pub fn parametric_sample_size(v_max: f64, eps: f64, k1: f64, entropy: f64, delta: f64, horizon: usize) -> Result<f64> {
    if !(v_max > 0.0 && eps > 0.0) {
        return Err(Error::input("v_max/eps", "must be positive"));
    }
    if !(k1 > 0.0) {
        return Err(Error::input("k1", "must be positive"));
    }
    if !(entropy >= 0.0) {
        return Err(Error::input("entropy", "must be nonnegative"));
    }
    if horizon == 0 {
        return Err(Error::input("horizon", "must be at least 1"));
    }
    check_delta(delta, true)?;
    Ok(v_max / eps * (horizon as f64).powf(0.5 * k1) * (entropy + (1.0 / delta).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(v_max: f64, eta: f64, delta: f64) -> BoundInputs {
        BoundInputs {
            v_max,
            eta,
            delta,
            horizon: 4,
            entropy: EntropyProfile::Constant { log_n: 0.0 },
            vc_dim: None,
            c_floor: 0.0,
        }
    }

    #[test]
    fn bernstein_reference_value() {
        // 2 exp(-25), evaluated independently
        let v = bernstein_tail(1.0, 100, 1.0, 1.0).unwrap();
        assert!((v - 2.777_588_772_992_804e-11).abs() < 1e-24);
    }

    #[test]
    fn bernstein_monotone() {
        let mut last = 1.0;
        for i in 1..50 {
            let v = bernstein_tail(i as f64 * 0.1, 20, 1.0, 1.0).unwrap();
            assert!(v <= last);
            last = v;
        }
        assert!(bernstein_tail(0.5, 200, 1.0, 1.0).unwrap() < bernstein_tail(0.5, 100, 1.0, 1.0).unwrap());
        assert!(bernstein_tail(0.0, 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn single_policy_examples() {
        assert_eq!(
            single_policy_epsilon(&inputs(1.0, 2.0, 1.0), 10, FormulaVariant::PaperForm).unwrap(),
            0.0
        );
        let b = (2.0_f64 / 0.05).ln();
        let e = single_policy_epsilon(&inputs(3.0, 1.0, 0.05), 50, FormulaVariant::ExactForm).unwrap();
        assert!((e - 2.0 * b * 3.0 / 50.0).abs() < 1e-14);
        let e = single_policy_epsilon(&inputs(1.0, 2.0, 0.05), 100, FormulaVariant::PaperForm).unwrap();
        assert!((e - 0.124_6).abs() < 5e-5, "{e}");
    }

    #[test]
    fn kearns_reference_value() {
        let v = kearns_sample_size(1.0, 3, 1, (-1.0f64).exp()).unwrap();
        assert!((v - 64.0 * 3f64.ln() * 4.0).abs() < 1e-10);
        assert!((v - 281.2).abs() < 0.1);
        let v2 = kearns_sample_size(1.0, 3, 2, (-1.0f64).exp()).unwrap();
        assert_eq!(v2, 2.0 * v);
        assert!(kearns_sample_size(1.0, 1, 1, 0.5).is_err());
    }

    #[test]
    fn kearns_quadratic_in_ratio() {
        let d = 0.1;
        let r = 5.0;
        let a = kearns_sample_size(r, 4, 3, d).unwrap();
        let b = kearns_sample_size(2.0 * r, 4, 3, d).unwrap();
        let t = 4.0;
        let shift = (t + (2.0 * r).ln() + 10f64.ln()) / (t + r.ln() + 10f64.ln());
        assert!((b / a - 4.0 * shift).abs() < 1e-12);
    }

    #[test]
    fn mcdiarmid_reductions() {
        let mut i = inputs(2.0, 1.0, 0.1);
        i.c_floor = 0.5;
        i.entropy = EntropyProfile::Constant { log_n: 1.5 };
        let v = mcdiarmid_sample_size(&i, 0.5).unwrap();
        assert!((v - 16.0 * (1.5 + 10f64.ln())).abs() < 1e-10);

        let mut i = inputs(1.0, 1.0, (-1.0f64).exp());
        i.c_floor = 0.1;
        let eta = 2f64.powi(4) * 0.9f64.powi(4);
        let v = mcdiarmid_sample_size(&i, 0.25).unwrap();
        assert!((v - 16.0 * eta * eta).abs() < 1e-9 * v);
    }

    #[test]
    fn parametric_sample_size_is_linear() {
        let a = parametric_sample_size(1.0, 0.1, 2.0, 1.0, 0.05, 9).unwrap();
        let b = parametric_sample_size(2.0, 0.1, 2.0, 1.0, 0.05, 9).unwrap();
        assert!((b / a - 2.0).abs() < 1e-14);
        let c = parametric_sample_size(3.0, 0.5, 4.0, 0.7, 0.2, 1).unwrap();
        assert!((c - 6.0 * (0.7 + 5f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn degenerate_uniform_sample_size() {
        let i = inputs(1.0, 1.0, 0.1);
        let eps = 0.3;
        let n = uniform_sample_size(&i, eps, &|_| 1.0).unwrap();
        let c0 = 128.0 * (8.0_f64 / 0.1).ln();
        let b = eps / 8.0;
        assert_eq!(n, (c0 * b / (eps * eps)).ceil() as u64);
    }

    #[test]
    fn uniform_rejects_bad_inputs() {
        assert!(uniform_sample_size(&inputs(1.0, 2.0, 1.0), 0.5, &|_| 1.0).is_err());
        assert!(matches!(
            uniform_sample_size(&inputs(1.0, 2.0, 0.5), 0.5, &|_| f64::INFINITY),
            Err(Error::InfiniteCovering(_))
        ));
        assert!(uniform_epsilon(&inputs(1.0, 2.0, 0.5), 0, &|_| 1.0).is_err());
    }

    #[test]
    fn uniform_epsilon_constant_covering_is_closed_form() {
        let i = inputs(2.0, 5.0, 0.05);
        let n = 1000;
        let eps = uniform_epsilon(&i, n, &|_| 4.0).unwrap();
        let c0 = 128.0 * (32.0_f64 / 0.05).ln();
        let nf = n as f64;
        let lin = c0 * 2.0 * 5.0 * nf / 8.0;
        let closed = (lin + (lin * lin + 4.0 * nf * nf * c0 * 4.0 * 4.0).sqrt()) / (2.0 * nf * nf);
        assert!((eps - closed).abs() < 1e-12 * closed);
    }
}
