//! Deterministic sampling helpers.
//!
//! Everything in the library that needs randomness draws from a
//! [`ChaCha8Rng`] through the small set of primitives below, so results are
//! reproducible for a given seed across platforms and releases. The
//! conversions from raw `u64` output are fixed here rather than delegated to
//! distribution crates whose rounding could drift between versions.

use rand_core::RngCore;

pub use rand_chacha::ChaCha8Rng;

/// Uniform draw in `[0, 1)` using the top 53 bits of a `u64`.
pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform(rng)
}

/// Uniform draw in `(0, 1]`; safe as a logarithm argument.
fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One standard normal deviate via the Box-Muller transform.
///
/// Both deviates of the pair are *not* cached: each call consumes exactly two
/// `u64` draws, which keeps the stream position a pure function of the call
/// count (handy when several consumers share interleaved access patterns).
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = uniform_open(rng);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// In-place Fisher-Yates shuffle.
pub fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}
