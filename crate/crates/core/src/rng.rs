//! Counter-based randomness.
//!
//! Two generators are used, both fully determined by a 64-bit seed:
//!
//! * **Keyed draws** (`KeyedHash`): environment noise, private values and
//!   seeded representatives are pure functions of a key tuple such as
//!   `(seed, round, quantized arm)`. The key words are folded through the
//!   SplitMix64 finalizer (`z ^= z >> 30; z *= 0xbf58476d1ce4e5b9; z ^= z >> 27;
//!   z *= 0x94d049bb133111eb; z ^= z >> 31`) after adding the golden-ratio
//!   increment `0x9e3779b97f4a7c15` per word. The top 53 bits of the result
//!   give a uniform in `[0, 1)`.
//! * **Selection stream**: the algorithms draw one uniform per round from
//!   ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`).
//!
//! Arms on a continuum are quantized to a `2^-40` grid before keying.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Resolution used to turn a real coordinate into a noise key.
pub const ARM_QUANTUM_BITS: i32 = 40;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Incremental keyed hash. Each `push` absorbs one 64-bit word.
#[derive(Debug, Clone, Copy)]
pub struct KeyedHash(u64);

impl KeyedHash {
    pub fn new(seed: u64) -> Self {
        KeyedHash(splitmix64(seed.wrapping_add(GOLDEN)))
    }

    #[inline]
    pub fn push(self, word: u64) -> Self {
        KeyedHash(splitmix64(self.0 ^ word.wrapping_add(GOLDEN)))
    }

    #[inline]
    pub fn push_coord(self, x: f64) -> Self {
        self.push(quantize(x))
    }

    #[inline]
    pub fn finish(self) -> u64 {
        self.0
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(self) -> f64 {
        to_unit(self.0)
    }
}

#[inline]
pub fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Quantize a coordinate to the `2^-40` grid used for noise keys.
#[inline]
pub fn quantize(x: f64) -> u64 {
    (x * (1u64 << ARM_QUANTUM_BITS) as f64).round() as i64 as u64
}

/// Derive an independent sub-seed (e.g. algorithm vs environment streams).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    KeyedHash::new(seed).push(stream).finish()
}

/// Per-run selection stream.
#[derive(Debug, Clone)]
pub struct SelectionRng(ChaCha8Rng);

impl SelectionRng {
    pub fn new(seed: u64) -> Self {
        SelectionRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }
}

/// Inverse-CDF draw over `probs` in slice order. The last index with
/// positive probability absorbs any rounding shortfall.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// Standard normal from two keyed uniforms (Box-Muller).
pub fn normal_from(h: KeyedHash) -> f64 {
    let u1 = h.push(1).uniform();
    let u2 = h.push(2).uniform();
    let r = (-2.0 * (1.0 - u1).ln()).sqrt();
    r * (std::f64::consts::TAU * u2).cos()
}
