//! Counter-based random streams keyed by `(seed, replication)`.
//!
//! Each replication owns an independent ChaCha stream selected by the
//! replication index, so the draws of replication `r` do not depend on how
//! many other replications ran before it or on which thread.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Identifies one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    pub replication: u64,
}

impl StreamKey {
    pub fn new(seed: u64, replication: u64) -> Self {
        Self { seed, replication }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.replication);
        rng
    }
}

/// Shorthand for `StreamKey::new(seed, replication).rng()`.
pub fn stream(seed: u64, replication: u64) -> ChaCha12Rng {
    StreamKey::new(seed, replication).rng()
}
