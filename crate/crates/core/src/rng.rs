//! Deterministic keyed random streams.
//!
//! Every stochastic consumer owns an independent stream derived from
//! `(seed, label, parts)`. Streams are counter-based: the same key always
//! yields the same draws regardless of evaluation order, which is what makes
//! common-random-number comparisons and full-run reproducibility possible.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit key for a named stream.
pub fn stream_key(seed: u64, label: &str, parts: &[u64]) -> u64 {
    let mut h = FNV_OFFSET;
    for b in label.as_bytes() {
        h = (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME);
    }
    h = splitmix(h ^ seed);
    for p in parts {
        h = splitmix(h ^ *p);
    }
    h
}

/// Sequential generator for a named stream.
pub fn stream(seed: u64, label: &str, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, label, parts))
}

/// Single counter-based uniform draw in `[0, 1)`.
pub fn unit_uniform(seed: u64, label: &str, parts: &[u64]) -> f64 {
    let bits = splitmix(stream_key(seed, label, parts));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
