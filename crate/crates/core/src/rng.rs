//! Splittable seeding: every replicate draws from its own ChaCha stream so
//! serial and parallel runs see identical random numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keep unrelated consumers of one seed apart.
pub mod tag {
    pub const NOISE: u64 = 0x6e6f_6973;
    pub const PRIOR: u64 = 0x7072_696f;
    pub const FISHER: u64 = 0x6669_7368;
    pub const CUTOFF: u64 = 0x6375_746f;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a 64-bit key from a base seed and any number of labels.
pub fn derive(seed: u64, labels: &[u64]) -> u64 {
    let mut state = seed;
    let mut out = splitmix64(&mut state);
    for &l in labels {
        state ^= l.wrapping_mul(0xd6e8_feb8_6659_fd93);
        out ^= splitmix64(&mut state).rotate_left(17);
    }
    out
}

/// The random source for replicate `index` of the consumer identified by `labels`.
pub fn substream(seed: u64, labels: &[u64], index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, labels));
    rng.set_stream(index);
    rng
}
