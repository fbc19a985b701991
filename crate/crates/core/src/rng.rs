//! Seed fan-out.
//!
//! A single master seed is split into named substreams so that adding draws
//! to one component (say, the fading sampler) never shifts the random
//! sequence seen by another (say, replay-buffer sampling).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Named random substreams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    OrbitJitter,
    Mobility,
    Fading,
    Users,
    Policy,
    Buffer,
    Init,
    Exploration,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::OrbitJitter => 1,
            Stream::Mobility => 2,
            Stream::Fading => 3,
            Stream::Users => 4,
            Stream::Policy => 5,
            Stream::Buffer => 6,
            Stream::Init => 7,
            Stream::Exploration => 8,
        }
    }
}

/// Returns the generator for `stream` under `seed`.
///
/// The ChaCha stream id carries the substream, so the streams are
/// independent keystreams of the same key.
pub fn substream(seed: u64, stream: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// Like [`substream`] but additionally keyed by an index (episode number,
/// evaluation run), for streams that restart per episode.
pub fn indexed_substream(seed: u64, stream: Stream, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream.id());
    rng
}
