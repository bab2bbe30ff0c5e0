//! Deterministic sub-seed derivation.

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `keys` into `master` one word at a time, so distinct key paths give
/// unrelated streams.
pub fn derive(master: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(mix(master), |acc, &k| mix(acc ^ mix(k)))
}
