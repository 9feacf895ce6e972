//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream selected by
//! `(seed, stream)`. ChaCha is counter based, so work item `k` always sees
//! the same numbers no matter which thread runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
