//! Seeding scheme for every stochastic routine in the crate.
//!
//! All randomness comes from ChaCha8 (`rand_chacha` 0.9), a counter-based
//! generator. A run is identified by a master seed; independent trials are
//! separate ChaCha streams of the same key, selected by
//! `stream = trial * STREAMS_PER_TRIAL + purpose`. Results therefore depend
//! only on `(seed, trial)` and not on scheduling or on how many other trials
//! ran before.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Number of independent streams reserved per trial.
pub const STREAMS_PER_TRIAL: u64 = 4;

/// Purpose of a stream within a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// State dwell times of the telegraph process.
    Dwell = 0,
    /// Photon counts per bin.
    Counts = 1,
    /// Free-standing samplers (e.g. the dark dwell sampler).
    Sampler = 2,
}

/// Returns the generator for `(seed, trial, purpose)`.
pub fn stream_rng(seed: u64, trial: u64, purpose: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(STREAMS_PER_TRIAL).wrapping_add(purpose as u64));
    rng
}
