//! Seeded random number generation.
//!
//! Every randomized operation draws from [`ChaCha8Rng`], a counter-based
//! generator. Independent streams are derived from a 64-bit master seed by
//! the splitting rule
//!
//! ```text
//! stream(master, id) = ChaCha8Rng::seed_from_u64(master) with set_stream(id)
//! ```
//!
//! so replica `id` of an experiment never shares keystream with replica
//! `id + 1`, and results do not depend on how work is scheduled.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub type Rng = ChaCha8Rng;

/// Generator for the master seed itself (stream 0).
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `id` derived from `master`.
pub fn stream(master: u64, id: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(id);
    rng
}

/// Serialize the full generator state (key, stream, position) as hex.
pub fn state_to_hex(rng: &Rng) -> String {
    let mut bytes = Vec::with_capacity(56);
    bytes.extend_from_slice(&rng.get_seed());
    bytes.extend_from_slice(&rng.get_stream().to_le_bytes());
    bytes.extend_from_slice(&rng.get_word_pos().to_le_bytes());
    hex::encode(bytes)
}

pub fn state_from_hex(s: &str) -> Result<Rng> {
    let bytes = hex::decode(s.trim()).map_err(|e| Error::invalid(format!("rng state: {e}")))?;
    if bytes.len() != 56 {
        return Err(Error::invalid(format!(
            "rng state must be 56 bytes, got {}",
            bytes.len()
        )));
    }
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&bytes[..32]);
    let stream = u64::from_le_bytes(bytes[32..40].try_into().unwrap());
    let pos = u128::from_le_bytes(bytes[40..56].try_into().unwrap());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream);
    rng.set_word_pos(pos);
    Ok(rng)
}

/// Inverse-CDF draw from a probability vector. The last index with positive
/// mass absorbs rounding at the top end.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}
