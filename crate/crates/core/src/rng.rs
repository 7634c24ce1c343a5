//! Seed derivation. Every random component draws from its own ChaCha stream
//! keyed by the master seed plus a purpose tag and an index, so results do not
//! depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `seed` for the given purpose tag and index.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(tag)).wrapping_add(index))
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(seed: u64, tag: u64, index: u64) -> Rng {
    seeded(derive_seed(seed, tag, index))
}

// Purpose tags.
pub(crate) const TAG_DEGREES: u64 = 1;
pub(crate) const TAG_ASSEMBLE: u64 = 2;
pub(crate) const TAG_PLACEMENT: u64 = 3;
pub(crate) const TAG_CHURN: u64 = 4;
pub(crate) const TAG_WALKS: u64 = 5;
pub(crate) const TAG_SEARCH: u64 = 6;
pub(crate) const TAG_SOURCE: u64 = 7;
pub(crate) const TAG_REPLICATE: u64 = 8;
