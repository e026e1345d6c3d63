//! Seed handling.
//!
//! Trial `t` of a run with master seed `s` draws from ChaCha8 seeded with `s`
//! on stream `t`. Streams are independent, so results do not depend on how
//! trials are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng
}
