//! Seed handling. Every randomized routine takes an explicit stream; Monte
//! Carlo loops derive one independent ChaCha stream per trial so results do
//! not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Named sub-streams of one experiment seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Verifier = 1,
    Prover = 2,
    Qhe = 3,
    Functionality = 4,
    Trials = 5,
    Harness = 6,
}

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn stream(seed: u64, which: Stream) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

/// Stream for trial `index` of a Monte Carlo run.
pub fn trial(seed: u64, index: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(index.wrapping_add(1 << 32));
    rng
}

/// Per-trial seed, for code that wants to reseed sub-streams itself.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
