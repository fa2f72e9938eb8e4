//! Counter-based seed derivation.
//!
//! Every random stream in a run is keyed by the master seed plus a tuple of
//! counters (stream tag, slot, device, ...), so adding a device never shifts
//! the draws of any other device.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `keys` into `master` one at a time.
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(master), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

pub fn stream(master: u64, keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, keys))
}
