//! Reproducible per-trial random substreams.
//!
//! Every trial draws from its own ChaCha stream `(seed, trial + 1)`, so
//! trials are order-independent and safe to run in parallel. Stream 0 is
//! reserved for non-trial draws.
//!
//! Draw order inside one trial: query index (when uniform), scenario coin
//! (when random), Bob's Q1 measurement, Bob's Q2 measurement, Alice's plain
//! query register, Alice's plain answer register, the projective test, and
//! finally Bob's index guess.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_add(1));
    rng
}
