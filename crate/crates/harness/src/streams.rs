//! Seeded random streams.
//!
//! Every consumer draws from its own ChaCha8 stream of the experiment seed:
//! sign-pattern trial `t` uses stream `t`, named consumers use a stream in
//! the upper half of the stream space derived from their label. Results
//! therefore do not depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Generator for sign-pattern trial `trial`.
pub fn trial(seed: u64, trial: usize) -> ChaCha8Rng {
    stream(seed, trial as u64)
}

/// Generator for a named consumer such as a sequence family or a check.
pub fn named(seed: u64, label: &str) -> ChaCha8Rng {
    stream(seed, label_id(label))
}

// FNV-1a with the top bit set, disjoint from trial streams.
fn label_id(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h | (1 << 63)
}
