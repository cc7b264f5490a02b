//! Seeded, splittable random streams.
//!
//! Every trial `k` of a run with seed `s` draws from ChaCha20 keyed by `s`
//! on stream `k`, so results do not depend on how trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Name recorded in reports.
pub const RNG_ALGORITHM: &str = "ChaCha20 (seed_from_u64, one stream per trial)";

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
