//! Named, per-purpose random streams.
//!
//! Every stochastic step of a run draws from its own generator seeded by
//! mixing the run seed with a purpose tag and a few integer coordinates
//! (client id, round). Nothing is shared between streams, so results do not
//! depend on the order in which clients are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tags. Changing a value changes every result derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Data = 1,
    Partition = 2,
    Holdout = 3,
    ModelInit = 4,
    LocalTrain = 5,
    Attackers = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a stream tag and coordinates into a new seed.
pub fn derive_seed(base: u64, stream: Stream, coords: &[u64]) -> u64 {
    let mut h = splitmix64(base ^ splitmix64(stream as u64));
    for &c in coords {
        h = splitmix64(h ^ c.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    }
    h
}

pub fn stream_rng(base: u64, stream: Stream, coords: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(base, stream, coords))
}
