//! Seed derivation for replications and trajectories.
//!
//! `derive_seed(master, i)` is the SplitMix64 finalizer applied to
//! `master ^ (0x9E3779B97F4A7C15 * (i + 1))` (wrapping multiply). Every step
//! is a bijection on `u64`, so distinct indices give distinct seeds for a
//! fixed master seed.

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn test_vectors() {
        // SplitMix64 reference stream seeded with 0 starts at these values
        assert_eq!(derive_seed(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(derive_seed(0, 1), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(derive_seed(0, 2), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn no_collisions_at_desk_scale() {
        for master in [0u64, 42, u64::MAX] {
            let seeds: HashSet<u64> = (0..200_000).map(|i| derive_seed(master, i)).collect();
            assert_eq!(seeds.len(), 200_000);
        }
    }
}
