//! Deterministic, domain-separated pseudorandom substreams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by
//! (user seed, domain tag, substream index). The key derivation is fixed:
//! FNV-1a 64 over the domain tag bytes, the little-endian seed, and the
//! little-endian index, expanded to 32 bytes with SplitMix64. Identical
//! triples give identical streams on every platform and at any degree of
//! parallelism; that is what makes bootstrap runs reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fnv1a_64(seed: u64, domain: &str, index: u64) -> u64 {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    let mut hash = OFFSET;
    let mut step = |byte: u8| {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(PRIME);
    };
    for byte in domain.as_bytes() {
        step(*byte);
    }
    for byte in seed.to_le_bytes() {
        step(byte);
    }
    for byte in index.to_le_bytes() {
        step(byte);
    }
    hash
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// The generator for substream `index` of the named domain under the
/// given user seed.
pub(crate) fn derive_rng(seed: u64, domain: &str, index: u64) -> ChaCha8Rng {
    let mut state = fnv1a_64(seed, domain, index);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
