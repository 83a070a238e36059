//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! keyed by the root seed mixed with a stream identifier, so any batch can be
//! regenerated without replaying the ones before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives a child seed as `root ^ hash(domain, index)`.
pub fn derive(root: u64, domain: u64, index: u64) -> u64 {
    root ^ splitmix64(splitmix64(domain) ^ index)
}

pub fn rng_for(root: u64, domain: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(root, domain, index))
}

// Stream domains.
pub const DOMAIN_SUBSET: u64 = 1;
pub const DOMAIN_KMEANS: u64 = 2;
pub const DOMAIN_SM: u64 = 3;
pub const DOMAIN_TPC: u64 = 4;
pub const DOMAIN_ADS: u64 = 5;
