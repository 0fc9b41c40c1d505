//! Stable derivation of independent random sub-streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator seeded with a
//! 64-bit key derived from the run seed plus a list of labels (oil id,
//! excitation, repetition, fold, ...). The derivation is a length-prefixed
//! FNV-1a hash followed by a SplitMix64 finalizer, so keys are identical
//! across platforms, toolchains and execution orders.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut state: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        state ^= u64::from(b);
        state = state.wrapping_mul(FNV_PRIME);
    }
    state
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a sub-stream key from `seed` and an ordered list of labels.
pub fn derive(seed: u64, parts: &[&[u8]]) -> u64 {
    let mut state = fnv1a(FNV_OFFSET, &seed.to_le_bytes());
    for part in parts {
        state = fnv1a(state, &(part.len() as u64).to_le_bytes());
        state = fnv1a(state, part);
    }
    splitmix64(state)
}

pub fn rng(key: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(key)
}

/// Shorthand for `rng(derive(seed, parts))`.
pub fn stream(seed: u64, parts: &[&[u8]]) -> RunRng {
    rng(derive(seed, parts))
}
