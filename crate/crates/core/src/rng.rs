//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! 64-bit seed. Experiments derive one child seed per
//! `(master_seed, trial_index, purpose)` triple, so a trial's randomness does
//! not depend on which thread ran it or on how many trials came before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a child stream is used for. The tag keeps streams for different
/// roles within the same trial disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Dataset = 1,
    Mechanism = 2,
    OutSample = 3,
    Columns = 4,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `(master_seed, index, purpose)`.
pub fn derive_seed(master_seed: u64, index: u64, purpose: Purpose) -> u64 {
    let mut h = splitmix64(master_seed);
    h = splitmix64(h ^ index.wrapping_mul(GOLDEN));
    splitmix64(h ^ (purpose as u64).rotate_left(32))
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
