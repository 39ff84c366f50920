//! Counter-based seed derivation.
//!
//! Every random stream in the pipeline is keyed by a tuple of counters
//! (master seed, scenario, repetition, purpose, feature, ...). Hashing the
//! tuple instead of drawing from a shared generator keeps results
//! independent of execution order and worker count.

use sha2::{Digest, Sha256};

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent sub-seed for stream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream ^ 0xD1B5_4A32_D192_ED03))
}

/// Seed derived from a master seed, a textual key and integer counters.
pub fn derive(master: u64, key: &str, counters: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((key.len() as u64).to_le_bytes());
    h.update(key.as_bytes());
    for c in counters {
        h.update(c.to_le_bytes());
    }
    let out = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&out[..8]);
    u64::from_le_bytes(bytes)
}
