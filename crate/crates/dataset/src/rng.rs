//! Index-keyed random streams. Every stream is a pure function of the global
//! seed and a key path, so results do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DOMAIN_GLYPH: u64 = 1;
pub const DOMAIN_NOISE: u64 = 2;
pub const DOMAIN_AUGMENT: u64 = 3;
pub const DOMAIN_SPLIT: u64 = 4;
pub const DOMAIN_SUBSET: u64 = 5;

pub const CHANNEL_READOUT: u64 = 0;
pub const CHANNEL_SAMPLE: u64 = 1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit key from a seed and a path of indices.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k.wrapping_add(0x632B_E59B_D9B4_E019))))
}

pub fn keyed_rng(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    let base = derive_seed(seed, keys);
    let mut bytes = [0u8; 32];
    let mut s = base;
    for chunk in bytes.chunks_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = keyed_rng(7, &[1, 2, 3]).gen();
        let b: u64 = keyed_rng(7, &[1, 2, 3]).gen();
        let c: u64 = keyed_rng(7, &[1, 2, 4]).gen();
        let d: u64 = keyed_rng(8, &[1, 2, 3]).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_ne!(derive_seed(0, &[1, 0]), derive_seed(0, &[0, 1]));
    }
}
