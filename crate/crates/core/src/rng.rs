//! Seeded, splittable randomness.
//!
//! Every stream is ChaCha20 keyed by `ChaCha20Rng::seed_from_u64(seed)` with
//! the 64-bit stream id set through `set_stream`. A field element is drawn
//! by rejection: take `next_u64()`, reject values `>= floor(2^64 / q) * q`,
//! and reduce the accepted value mod q. Index sampling uses the same
//! rejection rule with `q` replaced by the bound.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::field::{Fe, Field};

/// Stream ids used by the protocol drivers.
pub mod streams {
    pub const DATA_A: u64 = 1;
    pub const DATA_B: u64 = 2;
    pub const SOURCE_NOISE: u64 = 3;
    pub const COMMON_RANDOMNESS: u64 = 4;
    pub const STRAGGLERS: u64 = 5;
    pub const POINTS: u64 = 6;
    pub const SWEEP_CELLS: u64 = 7;
    pub const AUDIT: u64 = 8;
}

#[derive(Clone, Debug)]
pub struct FieldRng {
    inner: ChaCha20Rng,
}

impl FieldRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        FieldRng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, bound)`; `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = (u64::MAX / bound) * bound;
        loop {
            let v = self.inner.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    pub fn uniform(&mut self, field: &Field) -> Fe {
        field.elem(self.below(field.modulus()))
    }

    pub fn nonzero(&mut self, field: &Field) -> Fe {
        field.elem(1 + self.below(field.modulus() - 1))
    }

    /// `count` distinct indices from `[0, n)`, by a partial Fisher-Yates
    /// shuffle, returned sorted.
    pub fn sample_indices(&mut self, n: usize, count: usize) -> Vec<usize> {
        assert!(count <= n, "cannot sample {count} of {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..count {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut out = pool[..count].to_vec();
        out.sort_unstable();
        out
    }
}

/// Seed of the `index`-th child stream of `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.set_word_pos(index as u128 * 2);
    rng.next_u64()
}
