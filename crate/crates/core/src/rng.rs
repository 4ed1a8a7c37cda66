//! Seeded, splittable random streams.
//!
//! Every stochastic experiment draws from `ChaCha8` with
//!
//! - key = `LE64(master_seed) || LE64(domain) || 0^16`,
//! - stream = `index` (e.g. the prime, or the batch number),
//! - word position 0.
//!
//! `domain` separates experiments run from the same master seed. Integers in
//! `[0, n)` come from Lemire's multiply-and-reject method on successive
//! `next_u64` outputs, so any ChaCha8 implementation reproduces the draws.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub const DOMAIN_ORBITS: u64 = 1;
pub const DOMAIN_ENDO: u64 = 2;
pub const DOMAIN_LINFORMS: u64 = 3;

pub fn substream(master_seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Uniform integer in `[0, n)`, `n >= 1`.
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, n: u64) -> u64 {
    debug_assert!(n > 0);
    let mut m = rng.next_u64() as u128 * n as u128;
    if (m as u64) < n {
        let threshold = n.wrapping_neg() % n;
        while (m as u64) < threshold {
            m = rng.next_u64() as u128 * n as u128;
        }
    }
    (m >> 64) as u64
}
