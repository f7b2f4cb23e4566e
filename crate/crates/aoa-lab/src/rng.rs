//! Deterministic random-stream derivation.
//!
//! Every stochastic draw in this crate pulls from a stream addressed by
//! `(master_seed, purpose, index)`. The purpose string names what the draw is
//! for (e.g. an experiment name plus the parameter point) and the index is the
//! trial counter. Streams are independent of evaluation order, so running the
//! same plan on one thread or sixteen produces bit-identical output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a hash of a byte string, used to fold the purpose label into the seed.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// SplitMix64 finalizer; decorrelates structured inputs (sequential indices,
/// small master seeds) before they reach the stream cipher.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the 64-bit seed for the stream `(master, purpose, index)`.
pub fn stream_seed(master: u64, purpose: &str, index: u64) -> u64 {
    let tagged = splitmix64(master ^ fnv1a(purpose.as_bytes()));
    splitmix64(tagged ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Open the ChaCha8 stream for `(master, purpose, index)`.
pub fn stream(master: u64, purpose: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, purpose, index))
}
