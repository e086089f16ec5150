//! Seedable random streams.
//!
//! Every randomized routine in the crate draws from [`ChaCha8Rng`] seeded via
//! `SeedableRng::seed_from_u64`. The ChaCha stream is specified independently
//! of platform and word size, so a given seed reproduces the same graphs and
//! samples everywhere.

pub use rand_chacha::ChaCha8Rng as StreamRng;
use rand::SeedableRng;

pub fn stream(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Derives an independent sub-stream seed from a base seed and a path of
/// indices (splitmix64 finalizer applied per component).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut x = base;
    for &p in path {
        x = mix(x ^ mix(p.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    x
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
