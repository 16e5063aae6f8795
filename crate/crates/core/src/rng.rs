//! Deterministic randomness derivation.
//!
//! Every random choice in the simulator is drawn from a stream keyed by the
//! master seed plus a purpose tag and up to two coordinates (typically a
//! vertex id and a round or iteration). Streams are independent of the order
//! in which they are created, so results do not depend on worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags. Distinct tags give unrelated streams for the same coordinates.
pub mod tag {
    pub const PARTITION_VERTEX: u64 = 0x5041_5254_5645_5254;
    pub const PARTITION_COLOR_SEED: u64 = 0x5041_5254_434f_4c52;
    pub const TAPE: u64 = 0x5441_5045_0000_0001;
    pub const GENERATOR: u64 = 0x4745_4e45_5241_5445;
    pub const OPPORTUNISTIC: u64 = 0x4f50_504f_5254_554e;
    pub const TRIAL: u64 = 0x5452_4941_4c53_4545;
    pub const SHARD: u64 = 0x5348_4152_4448_5348;
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a list of words into one well-mixed seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x243f_6a88_85a3_08d3_u64, |acc, &p| mix64(acc ^ mix64(p)))
}

/// A ChaCha8 stream keyed by `(seed, tag, a, b)`.
pub fn stream(seed: u64, tag: u64, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(&[seed, tag, a, b]))
}

/// Word `index` of the infinite random tape attached to vertex `v`.
#[inline]
pub fn tape_word(master_seed: u64, v: u32, index: u64) -> u64 {
    derive_seed(&[master_seed, tag::TAPE, u64::from(v), index])
}

/// Seed for trial `t` of a multi-trial run.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    derive_seed(&[master_seed, tag::TRIAL, trial])
}
