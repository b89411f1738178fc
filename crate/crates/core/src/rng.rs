//! Seeded random streams.
//!
//! Every source of randomness in the toolkit is a ChaCha8 stream addressed by
//! `(seed, stream id)`. Separate consumers (weight init, dropout masks,
//! augmentation draws, per-epoch shuffles, ...) get separate stream ids so
//! adding draws to one never perturbs another, and a run is reproducible from
//! its seed alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids, one per consumer.
pub mod stream {
    pub const WEIGHT_INIT: u64 = 1;
    pub const DROPOUT: u64 = 2;
    pub const AUGMENT: u64 = 3;
    pub const SPLIT: u64 = 4;
    pub const SYNTHETIC: u64 = 5;
    /// Base for per-epoch shuffle streams: epoch `e` uses `SHUFFLE_BASE + e`.
    pub const SHUFFLE_BASE: u64 = 1 << 32;
}

/// Returns the generator for `(seed, stream)`.
pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The shuffle stream for one training epoch (1-based).
pub fn epoch_shuffle(seed: u64, epoch: usize) -> ChaCha8Rng {
    seeded(seed, stream::SHUFFLE_BASE + epoch as u64)
}
