//! Seed derivation.
//!
//! Every random stream in the crate is keyed by `(global seed, component, index)`
//! so that a grid cell, a fold or a scenario pair draws the same numbers no
//! matter which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Child seed for `component` / `index` under `seed`.
pub fn derive_seed(seed: u64, component: &str, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ fnv1a(component)) ^ splitmix64(index.wrapping_add(1)))
}

pub fn stream(seed: u64, component: &str, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, component, index))
}
