//! Splittable counter-based deterministic generator.
//!
//! Every random choice in the simulator flows from a single seed through
//! named substreams, so replays are bit-identical across runs and platforms
//! and independent streams never contend. Output `k` of a stream is a pure
//! function of `(key, k)` (a SplitMix64-style finalizer over a Weyl
//! sequence), so streams can be consumed lazily or in parallel.

use crate::scalar::Real;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn finalize(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One deterministic stream of draws.
#[derive(Debug, Clone)]
pub struct SeedStream {
    key: u64,
    counter: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: finalize(seed.wrapping_add(GOLDEN)),
            counter: 0,
        }
    }

    /// Derive an independent stream; `tag` names the purpose (experts,
    /// adversary, sampling, ...). Splitting does not advance this stream.
    pub fn split(&self, tag: u64) -> Self {
        Self {
            key: finalize(self.key ^ finalize(tag.wrapping_add(GOLDEN).wrapping_mul(GOLDEN))),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let k = self.counter;
        self.counter += 1;
        finalize(self.key.wrapping_add(k.wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_unit<F: Real>(&mut self) -> F {
        let u = (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
        F::real(u)
    }

    /// Uniform in `[lo, hi]`.
    pub fn next_in<F: Real>(&mut self, lo: F, hi: F) -> F {
        lo + (hi - lo) * self.next_unit()
    }

    /// Standard normal via Box-Muller; uniforms nudged away from zero.
    pub fn next_gaussian<F: Real>(&mut self) -> F {
        let u1 = ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0);
        let u2 = (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
        F::real((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos())
    }

    /// Draw an index from a probability vector by inverse CDF.
    pub fn sample_index<F: Real>(&mut self, weights: &[F]) -> usize {
        debug_assert!(!weights.is_empty());
        let u: F = self.next_unit();
        let mut acc = F::zero();
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        weights.len() - 1
    }
}
