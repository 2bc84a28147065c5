//! Per-trial random streams.
//!
//! Every trial of a trace ensemble draws from ChaCha8 streams keyed by
//! `(master seed, trial index, purpose)`, so results do not depend on the
//! order in which trials are scheduled, and changing e.g. the vibration or the
//! spin state never shifts the arrival times of a paired run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Each purpose gets its own stream per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Arrivals = 0,
    Spins = 1,
    Acceptance = 2,
    Noise = 3,
}

const PURPOSES: u64 = 4;

pub fn stream_rng(master_seed: u64, trial: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial.wrapping_mul(PURPOSES).wrapping_add(purpose as u64));
    rng
}
