//! Seeded random source.
//!
//! One generator family is used everywhere: ChaCha8 in counter mode, keyed by
//! a 64-bit seed with a 64-bit stream id. Distinct (seed, stream) pairs are
//! independent streams, so parallel trials never share state, and identical
//! pairs replay bit-identical draws on any platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type WalkRng = ChaCha8Rng;

/// Generator for a (seed, stream) pair.
pub fn stream_rng(seed: u64, stream: u64) -> WalkRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in [0, 1).
pub fn unit(rng: &mut WalkRng) -> f64 {
    rng.gen::<f64>()
}

/// Inverse-CDF draw from a finite distribution given by its probabilities.
/// Deterministic given the generator state; the last index absorbs any
/// floating-point shortfall in the cumulative sum.
pub fn sample_index(probs: &[f64], rng: &mut WalkRng) -> usize {
    let u = unit(rng);
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
