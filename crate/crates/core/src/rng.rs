//! Seeded random streams.
//!
//! Every consumer of randomness derives its own ChaCha8 stream from the run
//! seed plus a tag path, so results do not depend on the order in which
//! independent pieces of work draw numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for `seed` alone.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream identified by `seed` and a tag path.
pub fn stream(seed: u64, tags: &[u64]) -> Rng {
    let id = tags
        .iter()
        .fold(0x5EED_u64, |acc, &t| splitmix(acc ^ splitmix(t)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Derived 64-bit seed for handing to an API that takes a plain seed.
pub fn derive(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix(seed), |acc, &t| splitmix(acc ^ t))
}
