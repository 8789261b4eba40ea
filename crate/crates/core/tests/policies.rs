mod common;

use pomdp_ope::experiments::default_instance;
use pomdp_ope::policy::{
    covering_number, covering_number_with_limit, policy_distance, ContextMap, EntropyProfile, Policy, PolicyClass,
};
use proptest::prelude::*;

fn contexts() -> Vec<Vec<usize>> {
    ContextMap {
        num_observations: 2,
        window: 1,
    }
    .all()
}

fn policy_from(seed: u64, floor: f64) -> Policy {
    common::random_policy(&mut common::rng(seed), 2, 3, 1, floor)
}

proptest! {
    #[test]
    fn distance_is_a_pseudometric(a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), floor in 0.01f64..0.3) {
        let (p, q, r) = (policy_from(a, floor), policy_from(b, floor), policy_from(c, floor));
        let ctx = contexts();
        let pq = policy_distance(&p, &q, &ctx).unwrap();
        let qp = policy_distance(&q, &p, &ctx).unwrap();
        let pr = policy_distance(&p, &r, &ctx).unwrap();
        let rq = policy_distance(&r, &q, &ctx).unwrap();
        prop_assert_eq!(policy_distance(&p, &p, &ctx).unwrap(), 0.0);
        prop_assert!(pq >= 0.0);
        prop_assert_eq!(pq, qp);
        prop_assert!(pq <= pr + rq + 1e-12);
        // floor bounds the distance
        prop_assert!(pq <= ((1.0 - 2.0 * floor) / floor).ln() + 1e-12);
    }

    #[test]
    fn covering_shrinks_with_radius(seed in any::<u64>(), size in 2usize..9, e1 in 0.01f64..2.0, e2 in 0.01f64..2.0) {
        let mut r = common::rng(seed);
        let members: Vec<Policy> = (0..size).map(|_| common::random_policy(&mut r, 2, 2, 1, 0.05)).collect();
        let cls = PolicyClass::new(members).unwrap();
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let small = covering_number(&cls, lo).unwrap();
        let large = covering_number(&cls, hi).unwrap();
        prop_assert!(large.count <= small.count);
        prop_assert!(small.count <= size);
        prop_assert!(small.exact);
        // greedy never beats the exact minimum
        let greedy = covering_number_with_limit(&cls, lo, 0).unwrap();
        prop_assert!(greedy.count >= small.count);
        prop_assert!(!greedy.exact);
    }
}

/// Smallest subset of centers whose balls cover everything, by trying every
/// subset.
fn brute_force_cover(d: &[Vec<f64>], eps: f64) -> usize {
    let n = d.len();
    (1u32..(1 << n))
        .filter(|mask| (0..n).all(|j| (0..n).any(|i| mask & (1 << i) != 0 && d[i][j] <= eps)))
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

#[test]
fn default_class_cover_matches_brute_force() {
    let inst = default_instance();
    let m = inst.class.members();
    let d: Vec<Vec<f64>> = m
        .iter()
        .map(|p| {
            m.iter()
                .map(|q| policy_distance(p, q, inst.class.contexts()).unwrap())
                .collect()
        })
        .collect();
    let mut radii: Vec<f64> = d.iter().flatten().copied().filter(|&x| x > 0.0).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let mut probes = vec![radii[0] / 2.0];
    for w in radii.windows(2) {
        probes.push(w[0]);
        probes.push(0.5 * (w[0] + w[1]));
    }
    probes.push(*radii.last().unwrap() * 2.0);
    for eps in probes {
        let cover = covering_number(&inst.class, eps).unwrap();
        assert_eq!(cover.count, brute_force_cover(&d, eps), "radius {eps}");
        // the returned centers really cover the class
        assert!((0..m.len()).all(|j| cover.centers.iter().any(|&i| d[i][j] <= eps)));
    }
}

#[test]
fn exact_profile_agrees_with_direct_counts() {
    let inst = default_instance();
    let profile = EntropyProfile::exact(&inst.class).unwrap();
    for eps in [1e-6, 0.05, 0.1, 0.3, 0.5, 0.9, 1.0, 1.5, 2.0, 5.0] {
        let direct = (covering_number(&inst.class, eps).unwrap().count as f64).ln();
        assert_eq!(profile.log_covering(eps, 4), direct, "radius {eps}");
    }
}

#[test]
fn zero_probability_gives_infinite_distance() {
    let p = Policy::tabular(vec![vec![1.0, 0.0], vec![0.5, 0.5]], 0.0).unwrap();
    let q = Policy::tabular(vec![vec![0.5, 0.5], vec![0.5, 0.5]], 0.0).unwrap();
    assert!(policy_distance(&p, &q, &contexts()).unwrap().is_infinite());
    let cls = PolicyClass::new(vec![p, q]).unwrap();
    assert!(EntropyProfile::exact(&cls).is_err());
}

#[test]
fn finite_window_policies_read_recent_observations() {
    // one row per context of length 1, then length 2
    let rows = vec![
        vec![0.8, 0.2],
        vec![0.3, 0.7],
        vec![0.9, 0.1],
        vec![0.6, 0.4],
        vec![0.2, 0.8],
        vec![0.5, 0.5],
    ];
    let p = Policy::finite_window(2, 2, rows.clone(), 0.0).unwrap();
    let map = p.context_map();
    assert_eq!(map.len(), 6);
    for ctx in map.all() {
        let row = &rows[map.index(&ctx).unwrap()];
        assert_eq!(p.action_distribution(&ctx).unwrap(), row.as_slice());
        if ctx.len() == 2 {
            // older observations do not matter
            let mut longer = vec![1, 0, 1];
            longer.extend(&ctx);
            assert_eq!(p.action_distribution(&longer).unwrap(), row.as_slice());
        }
    }
}

#[test]
fn policy_spec_round_trips() {
    let inst = default_instance();
    for p in inst.class.members() {
        let back = Policy::from_spec(p.to_spec()).unwrap();
        assert_eq!(&back, p);
    }
}

#[test]
fn floors_are_enforced() {
    assert!(Policy::tabular(vec![vec![0.95, 0.05]], 0.1).is_err());
    assert!(Policy::tabular(vec![vec![0.9, 0.1]], 0.1).is_ok());
    assert!(Policy::tabular(vec![vec![0.7, 0.4]], 0.0).is_err());
}
