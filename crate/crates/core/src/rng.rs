//! Seeded generators. Every parallel consumer draws from an independent
//! ChaCha stream selected by a work-unit index, so results depend only on the
//! master seed and never on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for work unit `stream` under master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
