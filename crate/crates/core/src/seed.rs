//! Counter-based seed derivation.
//!
//! Every random stream in the crate is keyed by a path of integers starting at
//! a master seed: trial `t` of an experiment uses `split(master, t)`, layer `i`
//! of a graph uses `split(graph_seed, i)`. Derivation is a pure function of the
//! path, so results never depend on scheduling or worker count.
//!
//! `split(seed, index)` feeds `seed` and `index` through two rounds of the
//! SplitMix64 finalizer with distinct odd offsets (policy [`SEED_POLICY`]).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Version tag of the derivation below, echoed in experiment output.
pub const SEED_POLICY: &str = "splitmix64-split/1";

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child `index` of `seed`.
pub fn split(seed: u64, index: u64) -> u64 {
    let a = mix64(seed.wrapping_add(GOLDEN));
    mix64(a ^ index.wrapping_mul(GOLDEN).wrapping_add(0x632B_E59B_D9B4_E019))
}

pub fn rng_from(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
