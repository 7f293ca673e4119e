//! Seeding and sampling helpers.
//!
//! All randomness flows through `ChaCha8Rng` seeded with `seed_from_u64`.
//! Bounded integers use rejection sampling on `next_u64` and uniform reals use
//! the top 53 bits, so streams do not depend on the `rand` crate's
//! distribution code and stay stable across builds.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `seed` and a sequence of labels.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(mix64(seed), |acc, &l| mix64(acc ^ mix64(l.wrapping_add(0x5851_F42D_4C95_7F2D))))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform integer in `[0, bound)`.
pub fn below<R: RngCore>(rng: &mut R, bound: u64) -> u64 {
    assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX % bound) - 1;
    loop {
        let v = rng.next_u64();
        if v <= zone {
            return v % bound;
        }
    }
}

/// Uniform real in `[0, 1)` with 53 random bits.
pub fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Fisher-Yates shuffle of the first `take` positions: afterwards
/// `items[..take]` is a uniform random ordered sample of `items`.
pub fn partial_shuffle<R: RngCore, X>(rng: &mut R, items: &mut [X], take: usize) {
    let len = items.len();
    for i in 0..take.min(len) {
        let j = i + below(rng, (len - i) as u64) as usize;
        items.swap(i, j);
    }
}

pub fn shuffle<R: RngCore, X>(rng: &mut R, items: &mut [X]) {
    let len = items.len();
    partial_shuffle(rng, items, len);
}
