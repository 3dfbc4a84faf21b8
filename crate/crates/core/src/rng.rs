//! Seeded, portable random streams.
//!
//! Every stream is a ChaCha8 generator keyed from a 64-bit seed. Child
//! streams are derived by hashing the parent seed together with a text
//! label (and optionally an index) through SHA-256 and taking the first
//! eight bytes of the digest as a little-endian `u64`:
//!
//! ```text
//! child = u64_le(sha256(parent_le_bytes || label_utf8 || 0x00 || index_le_bytes)[0..8])
//! ```
//!
//! Both primitives are fully specified, so a seed reproduces the same draws
//! on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a child seed from `parent` and a label.
pub fn derive_seed(parent: u64, label: &str) -> u64 {
    derive_indexed_seed(parent, label, 0)
}

/// Derive a child seed from `parent`, a label and an index (replicates, rows, ...).
pub fn derive_indexed_seed(parent: u64, label: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(parent.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update([0u8]);
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

/// A deterministic random stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A fresh stream keyed from this stream's seed and `label`.
    /// Does not consume draws from `self`.
    pub fn child(&self, label: &str) -> RandomStream {
        RandomStream::new(derive_seed(self.seed, label))
    }

    pub fn child_indexed(&self, label: &str, index: u64) -> RandomStream {
        RandomStream::new(derive_indexed_seed(self.seed, label, index))
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Fair coin as `0` / `1`.
    pub fn bit(&mut self) -> u8 {
        u8::from(self.rng.gen::<bool>())
    }

    /// Uniform angle in `[0, 2π)`.
    pub fn angle(&mut self) -> f64 {
        self.uniform() * std::f64::consts::TAU
    }
}
