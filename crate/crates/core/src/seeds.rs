//! Counter-based seed derivation.
//!
//! A master seed expands into independent named streams, so adding a new
//! consumer never shifts the draws of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Named consumers of randomness in one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Data = 1,
    Holdout = 2,
    Split = 3,
    Evolution = 4,
    Oracle = 5,
    Repetition = 6,
    Generation = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(master: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream as u64)) ^ splitmix64(index.wrapping_add(0x5851_F42D)))
}

pub fn rng(master: u64, stream: Stream, index: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(derive(master, stream, index))
}
