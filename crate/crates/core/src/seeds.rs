//! Deterministic seed derivation.
//!
//! One master seed drives a whole run. Child seeds are derived from the
//! master seed, a label and a counter, so reordering or skipping one stage
//! never perturbs the randomness of another.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over arbitrary bytes; stable across platforms and versions.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Derive a child seed from `(master, label, index)`.
pub(crate) fn child_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut buf = Vec::with_capacity(label.len() + 16);
    buf.extend_from_slice(&master.to_le_bytes());
    buf.extend_from_slice(label.as_bytes());
    buf.extend_from_slice(&index.to_le_bytes());
    fnv1a64(&buf)
}

/// Seeded RNG for a derived stream.
pub(crate) fn rng_for(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(master, label, index))
}
