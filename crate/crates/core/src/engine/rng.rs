//! SplitMix64 used as a counter-based generator.
//!
//! Output `k` (0-based) for key `s` is `mix64(s + (k + 1) * GOLDEN_GAMMA)`
//! with wrapping arithmetic; this is bit-identical to the classic sequential
//! SplitMix64 seeded with `s`. The mapping is part of the external interface:
//! published simulation numbers are reproducible from (seed, reps) alone.

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Key offset for per-replication seeds, so replication streams are not
/// shifted copies of the master stream.
pub const REPLICATION_KEY: u64 = 0xD1B5_4A32_D192_ED03;

/// First four outputs for key 0.
pub const REFERENCE_SEED0: [u64; 4] = [
    0xe220_a839_7b1d_cdaf,
    0x6e78_9e6a_a1b9_65f4,
    0x06c4_5d18_8009_454f,
    0xf88b_b8a8_724c_81ec,
];

/// The SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Output number `counter` of the stream keyed by `key`.
pub fn output_at(key: u64, counter: u64) -> u64 {
    mix64(key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Seed of replication `rep` in a run seeded with `seed`.
pub fn replication_seed(seed: u64, rep: u64) -> u64 {
    output_at(seed ^ REPLICATION_KEY, rep)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    key: u64,
    counter: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self {
            key: seed,
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = output_at(self.key, self.counter);
        self.counter = self.counter.wrapping_add(1);
        v
    }

    /// Uniform integer in `0..bound` (Lemire's multiply-shift with rejection).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let product = self.next_u64() as u128 * bound as u128;
            if (product as u64) >= threshold {
                return (product >> 64) as u64;
            }
        }
    }

    /// In-place Fisher–Yates, swapping position `i` with a uniform index in
    /// `0..=i` for `i` from the top down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_vector() {
        let mut g = SplitMix64::new(0);
        let got: Vec<u64> = (0..4).map(|_| g.next_u64()).collect();
        assert_eq!(got, REFERENCE_SEED0);
    }

    #[test]
    fn counter_access_matches_sequential() {
        let mut g = SplitMix64::new(42);
        for k in 0..100 {
            assert_eq!(g.next_u64(), output_at(42, k));
        }
    }

    #[test]
    fn below_stays_in_range() {
        let mut g = SplitMix64::new(7);
        for bound in 1..200u64 {
            for _ in 0..50 {
                assert!(g.below(bound) < bound);
            }
        }
    }

    #[test]
    fn shuffle_uniform_on_four_elements() {
        // 10^5 shuffles of 4 items, chi-square over the 24 orders.
        let draws = 100_000u64;
        let mut counts = std::collections::HashMap::new();
        for r in 0..draws {
            let mut v = [0u8, 1, 2, 3];
            SplitMix64::new(replication_seed(2024, r)).shuffle(&mut v);
            *counts.entry(v).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 24);
        let expected = draws as f64 / 24.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // upper 0.1% point of chi-square with 23 degrees of freedom
        assert!(chi2 < 49.728, "chi2 = {chi2}");
    }
}
