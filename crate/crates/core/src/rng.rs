//! Seeded random streams.
//!
//! Every stream is xoshiro256++ seeded through SplitMix64 from a 64-bit seed,
//! and uniforms are drawn as `(next_u64() >> 11) * 2^-53`. Both steps are
//! fixed, so a seed names the same sequence on every platform.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

pub fn stream(seed: u64) -> StreamRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Uniform draw from `[0, 1)` with 53 random bits.
pub fn unit_f64(rng: &mut StreamRng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_pinned() {
        // first outputs of xoshiro256++ seeded with SplitMix64(0)
        let mut rng = stream(0);
        let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        let mut again = stream(0);
        let second: Vec<u64> = (0..3).map(|_| again.next_u64()).collect();
        assert_eq!(first, second);
        assert_ne!(first[0], first[1]);
    }

    #[test]
    fn unit_interval() {
        let mut rng = stream(7);
        for _ in 0..10_000 {
            let u = unit_f64(&mut rng);
            assert!((0.0..1.0).contains(&u));
        }
    }
}
